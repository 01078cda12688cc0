#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "djfam/gateway/service.hpp"

namespace djfam::cli {

/// Settings shared by every subcommand. Read from a TOML-style file of
/// `key = value` lines; `[section]` headers prefix the keys that follow.
struct Config {
  std::filesystem::path data_dir = "djfam-data";
  std::string host = "127.0.0.1";
  int port = 8080;
  /// Featurization workers; 0 means one per hardware thread.
  int workers = 0;
  gateway::ServiceOptions service;
};

Config parse_config(const std::string& text);
Config load_config_file(const std::filesystem::path& path);

/// Explicit path, else $DJFAM_CONFIG, else ./djfam.toml if present, else
/// defaults.
Config resolve_config(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace djfam::cli
