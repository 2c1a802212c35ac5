#include "sulab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sulab/error.hpp"

namespace sulab {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid(path, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid("line " + std::to_string(lineno),
                          "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigInvalid("line " + std::to_string(lineno), "empty key");
    cfg.kv_[key] = value;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigInvalid(key, "missing required field");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& dflt) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string s = get_string(key);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || !trim(std::string(end)).empty())
    throw ConfigInvalid(key, "not a number: '" + s + "'");
  return v;
}

double Config::get_double(const std::string& key, double dflt) const {
  return has(key) ? get_double(key) : dflt;
}

int Config::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || !trim(std::string(end)).empty())
    throw ConfigInvalid(key, "not an integer: '" + s + "'");
  return static_cast<int>(v);
}

int Config::get_int(const std::string& key, int dflt) const {
  return has(key) ? get_int(key) : dflt;
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  if (!has(key)) return dflt;
  const std::string s = get_string(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigInvalid(key, "not a boolean: '" + s + "'");
}

std::vector<double> Config::get_list(const std::string& key) const {
  const std::string s = get_string(key);
  std::vector<double> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || !trim(std::string(end)).empty())
      throw ConfigInvalid(key, "not a number list: '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigInvalid(key, "empty list");
  return out;
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& dflt) const {
  return has(key) ? get_list(key) : dflt;
}

}  // namespace sulab
