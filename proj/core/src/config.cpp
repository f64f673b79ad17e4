// SPDX-License-Identifier: Apache-2.0
#include "cisec/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <sstream>

namespace cisec {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_list(const std::string& key, const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key, "empty list entry for key '" + key + "'");
    items.push_back(item);
  }
  if (items.empty()) throw ConfigError(key, "key '" + key + "' needs a value");
  return items;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key, "key '" + key + "': '" + text + "' is not a number");
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(key, "key '" + key + "': '" + text + "' is not an integer");
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < -2147483647LL || v > 2147483647LL)
    throw ConfigError(key, "key '" + key + "': value out of range");
  return static_cast<int>(v);
}

std::vector<double> to_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(key, value)) out.push_back(to_double(key, item));
  return out;
}

int parse_modulation(const std::string& key, const std::string& value) {
  const std::string v = lower(value);
  if (v == "qpsk") return 4;
  if (v.size() > 3 && v.compare(v.size() - 3, 3, "psk") == 0)
    return to_int(key, v.substr(0, v.size() - 3));
  return to_int(key, v);
}

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += num(v[i]);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "n_t",    "k_eves",       "n_an",    "modulation", "gamma_d_db",        "gamma_e_db",
      "sigma_d2", "sigma_e2",   "eps_d",   "eps_e",      "realizations",      "slots",
      "seed",   "schemes",      "distances", "pathloss_exponent", "probe_samples"};
  return keys;
}

ExperimentConfig RunConfig::for_eves(std::size_t index) const {
  ExperimentConfig e = experiment;
  e.eves = eve_counts.at(index);
  return e;
}

RunConfig default_run_config() { return RunConfig{}; }

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  ExperimentConfig& e = cfg.experiment;
  if (value.empty()) throw ConfigError(key, "key '" + key + "' needs a value");
  if (key == "n_t") {
    e.antennas = to_int(key, value);
  } else if (key == "k_eves") {
    cfg.eve_counts.clear();
    for (const auto& item : split_list(key, value)) cfg.eve_counts.push_back(to_int(key, item));
    e.eves = cfg.eve_counts.front();
  } else if (key == "n_an") {
    e.an_streams = to_int(key, value);
  } else if (key == "modulation") {
    e.modulation_order = parse_modulation(key, value);
  } else if (key == "gamma_d_db") {
    e.gamma_d_db = to_doubles(key, value);
  } else if (key == "gamma_e_db") {
    e.gamma_e_db = to_doubles(key, value);
  } else if (key == "sigma_d2") {
    e.sigma_d2 = to_double(key, value);
  } else if (key == "sigma_e2") {
    e.sigma_e2 = to_double(key, value);
  } else if (key == "eps_d") {
    e.uncertainty.eps_d = to_double(key, value);
  } else if (key == "eps_e") {
    e.uncertainty.eps_e = to_double(key, value);
  } else if (key == "realizations") {
    e.realizations = to_int(key, value);
  } else if (key == "slots") {
    e.slots = to_int(key, value);
  } else if (key == "seed") {
    const long long s = to_integer(key, value);
    if (s < 0) throw ConfigError(key, "key 'seed' must be nonnegative");
    e.seed = static_cast<std::uint64_t>(s);
  } else if (key == "schemes") {
    e.schemes.clear();
    for (const auto& item : split_list(key, value)) {
      const auto s = parse_scheme(item);
      if (!s) throw ConfigError(key, "key 'schemes': unknown scheme '" + item + "'");
      e.schemes.push_back(*s);
    }
  } else if (key == "distances") {
    e.distances = to_doubles(key, value);
  } else if (key == "pathloss_exponent") {
    e.pathloss_exponent = to_double(key, value);
  } else if (key == "probe_samples") {
    e.probe_samples = to_int(key, value);
  } else {
    throw ConfigError(key, "unknown configuration key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg = default_run_config();
  std::string line;
  int line_no = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line, "line " + std::to_string(line_no) + ": expected key=value, got '" +
                                  line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw ConfigError(key, "key '" + key + "' given more than once");
    seen.push_back(key);
    apply_setting(cfg, key, value);
  }
  for (std::size_t i = 0; i < cfg.eve_counts.size(); ++i) {
    try {
      cfg.for_eves(i).validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidArgument& err) {
      throw ConfigError("", std::string("invalid configuration: ") + err.what());
    }
  }
  return cfg;
}

RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string to_config_text(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  std::ostringstream out;
  out << "n_t=" << e.antennas << '\n';
  out << "k_eves=";
  for (std::size_t i = 0; i < cfg.eve_counts.size(); ++i) out << (i ? "," : "") << cfg.eve_counts[i];
  out << '\n';
  out << "n_an=" << e.an_streams << '\n';
  out << "modulation=" << e.modulation_order << "psk\n";
  out << "gamma_d_db=" << join(e.gamma_d_db) << '\n';
  out << "gamma_e_db=" << join(e.gamma_e_db) << '\n';
  out << "sigma_d2=" << num(e.sigma_d2) << '\n';
  out << "sigma_e2=" << num(e.sigma_e2) << '\n';
  out << "eps_d=" << num(e.uncertainty.eps_d) << '\n';
  out << "eps_e=" << num(e.uncertainty.eps_e) << '\n';
  out << "realizations=" << e.realizations << '\n';
  out << "slots=" << e.slots << '\n';
  out << "seed=" << e.seed << '\n';
  out << "schemes=";
  for (std::size_t i = 0; i < e.schemes.size(); ++i) out << (i ? "," : "") << scheme_id(e.schemes[i]);
  out << '\n';
  if (!e.distances.empty()) out << "distances=" << join(e.distances) << '\n';
  out << "pathloss_exponent=" << num(e.pathloss_exponent) << '\n';
  out << "probe_samples=" << e.probe_samples << '\n';
  return out.str();
}

}  // namespace cisec
