#include "djfam/cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "djfam/common/error.hpp"

namespace djfam::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) return v.substr(1, v.size() - 2);
  return v;
}

// Drops a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

long long as_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::kInvalidArgument, "config key '" + key + "' expects an integer, got '" + v + "'");
}

double as_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::kInvalidArgument, "config key '" + key + "' expects a number, got '" + v + "'");
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(ErrorCode::kInvalidArgument, "config key '" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace

Config parse_config(const std::string& text) {
  Config c;
  auto& f = c.service.catalog.features;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"data_dir", [&](auto&, auto& v) { c.data_dir = v; }},
      {"host", [&](auto&, auto& v) { c.host = v; }},
      {"port", [&](auto& k, auto& v) { c.port = static_cast<int>(as_int(k, v)); }},
      {"workers", [&](auto& k, auto& v) { c.workers = static_cast<int>(as_int(k, v)); }},
      {"features.sample_rate", [&](auto& k, auto& v) { f.sample_rate = static_cast<int>(as_int(k, v)); }},
      {"features.frame_size", [&](auto& k, auto& v) { f.frame_size = static_cast<int>(as_int(k, v)); }},
      {"features.hop", [&](auto& k, auto& v) { f.hop = static_cast<int>(as_int(k, v)); }},
      {"features.n_mels", [&](auto& k, auto& v) { f.n_mels = static_cast<int>(as_int(k, v)); }},
      {"features.rolloff_fraction", [&](auto& k, auto& v) { f.rolloff_fraction = as_double(k, v); }},
      {"features.contrast_quantile", [&](auto& k, auto& v) { f.contrast_quantile = as_double(k, v); }},
      {"features.log_floor", [&](auto& k, auto& v) { f.log_floor = as_double(k, v); }},
      {"catalog.playlist_cap",
       [&](auto& k, auto& v) { c.service.catalog.playlist_cap = static_cast<std::size_t>(as_int(k, v)); }},
      {"recommender.raw_cosine", [&](auto& k, auto& v) { c.service.recommender.raw_cosine = as_bool(k, v); }},
      {"recommender.exclude_source", [&](auto& k, auto& v) { c.service.recommender.exclude_source = as_bool(k, v); }},
      {"recommender.top_k", [&](auto& k, auto& v) { c.service.top_k = static_cast<std::size_t>(as_int(k, v)); }},
      {"recommender.no_repeat_window",
       [&](auto& k, auto& v) { c.service.no_repeat_window = static_cast<std::size_t>(as_int(k, v)); }},
      {"messaging.session_gap_s", [&](auto& k, auto& v) { c.service.messaging.session_gap_s = as_int(k, v); }},
      {"messaging.recommendation_ttl_s",
       [&](auto& k, auto& v) { c.service.messaging.recommendation_ttl_ms = as_int(k, v) * kMsPerSecond; }},
      {"gateway.token_ttl_s", [&](auto& k, auto& v) { c.service.token_ttl_ms = as_int(k, v) * kMsPerSecond; }},
  };

  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::kInvalidArgument, "config line " + std::to_string(line_no) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::kInvalidArgument, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    const std::string value = unquote(trim(line.substr(eq + 1)));
    auto it = setters.find(key);
    if (it == setters.end()) fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
    it->second(key, value);
  }
  f.validate();
  return c;
}

Config load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Config c = parse_config(buf.str());
  if (c.data_dir.is_relative() && path.has_parent_path()) c.data_dir = path.parent_path() / c.data_dir;
  return c;
}

Config resolve_config(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return load_config_file(*explicit_path);
  if (const char* env = std::getenv("DJFAM_CONFIG"); env && *env) return load_config_file(env);
  if (std::filesystem::exists("djfam.toml")) return load_config_file("djfam.toml");
  return {};
}

}  // namespace djfam::cli
