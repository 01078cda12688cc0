#include "djfam/cli/commands.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <variant>

#include <pthread.h>

#include "CLI11.hpp"
#include "djfam/audio/resample.hpp"
#include "djfam/audio/wav.hpp"
#include "djfam/cli/report.hpp"
#include "djfam/common/error.hpp"
#include "djfam/dsp/featurize.hpp"
#include "djfam/gateway/http_server.hpp"

namespace djfam::cli {

using nlohmann::json;

namespace {

int worker_count(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  for (std::size_t t = 0; t < std::min(threads, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

json read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read manifest " + path.string());
  auto doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) fail(ErrorCode::kIo, "manifest " + path.string() + " is not valid JSON");
  if (doc.is_object() && doc.contains("songs")) doc = doc["songs"];
  if (!doc.is_array()) fail(ErrorCode::kIo, "manifest must be an array of songs or {\"songs\": [...]}");
  return doc;
}

int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::kIo ? kExitUsageError : kExitDomainError;
}

}  // namespace

IngestSummary ingest_manifest(gateway::Service& service, const std::filesystem::path& manifest, int workers,
                              std::ostream& err) {
  const json entries = read_manifest(manifest);
  const auto base = manifest.has_parent_path() ? manifest.parent_path() : std::filesystem::path(".");
  auto& catalog = service.catalog();
  const auto& cfg = catalog.options().features;

  struct Skipped {};
  struct Failed {
    std::string reason;
  };
  using Outcome = std::variant<catalog::PreparedSong, Skipped, Failed>;
  std::vector<Outcome> outcomes(entries.size(), Skipped{});

  parallel_for(entries.size(), worker_count(workers), [&](std::size_t i) {
    try {
      const auto meta = catalog::metadata_from_manifest(entries[i]);
      std::filesystem::path audio = entries[i].at("audio_path").get<std::string>();
      if (audio.is_relative()) audio = base / audio;
      const auto bytes = audio::read_file(audio);
      if (catalog.find_by_content_key(catalog::content_key(bytes, meta))) {
        outcomes[i] = Skipped{};
        return;
      }
      outcomes[i] = catalog::prepare_song(bytes, audio, meta, cfg);
    } catch (const std::exception& e) {
      outcomes[i] = Failed{e.what()};
    }
  });

  IngestSummary summary;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (auto* f = std::get_if<Failed>(&outcomes[i])) {
      ++summary.failed;
      err << "entry " << i << ": " << f->reason << '\n';
    } else if (std::holds_alternative<Skipped>(outcomes[i])) {
      ++summary.skipped;
    } else {
      try {
        const auto result = catalog.commit(std::get<catalog::PreparedSong>(std::move(outcomes[i])));
        ++(result.created ? summary.ingested : summary.skipped);
      } catch (const std::exception& e) {
        ++summary.failed;
        err << "entry " << i << ": " << e.what() << '\n';
      }
    }
  }
  return summary;
}

std::string recommendations_json(const std::vector<recommender::Recommendation>& recs) {
  return json(recs).dump();
}

std::unique_ptr<gateway::Service> open_service(const Config& config) {
  return std::make_unique<gateway::Service>(gateway::Stores::in_directory(config.data_dir), config.service);
}

namespace {

std::vector<std::string> read_id_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (auto doc = json::parse(text, nullptr, false); !doc.is_discarded() && doc.is_array()) {
    return doc.get<std::vector<std::string>>();
  }
  std::vector<std::string> ids;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() != '#') ids.push_back(line);
  }
  return ids;
}

int serve(gateway::Service& service, const Config& config, std::ostream& out) {
  // Signals are handled on a dedicated thread via sigwait.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  gateway::HttpServer server(service);
  const int port = server.bind(config.host, config.port);
  out << "listening on " << config.host << ':' << port << std::endl;

  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  pthread_kill(waiter.native_handle(), SIGTERM);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"djfam: music featurization, cross-generation recommendation and dyad messaging"};
  app.require_subcommand(1);

  std::string config_path, data_dir;
  app.add_option("--config", config_path, "Config file (default: $DJFAM_CONFIG or ./djfam.toml)");
  app.add_option("--data-dir", data_dir, "State directory (overrides config)");

  auto* ingest = app.add_subcommand("ingest", "Ingest songs listed in a JSON manifest");
  std::string manifest;
  int workers = -1;
  ingest->add_option("manifest", manifest, "Manifest path")->required();
  ingest->add_option("--workers", workers, "Featurization threads (0 = all cores)");

  auto* featurize = app.add_subcommand("featurize", "Print feature vectors of WAV files as JSON lines");
  std::vector<std::string> wav_files;
  featurize->add_option("files", wav_files, "WAV files")->required();
  featurize->add_option("--workers", workers, "Featurization threads (0 = all cores)");

  auto* recommend = app.add_subcommand("recommend", "Offline recommendations for a user playing a song");
  std::string song, user;
  std::size_t k = recommender::kDefaultTopK;
  std::vector<std::string> exclude;
  recommend->add_option("--song", song, "Currently playing song id")->required();
  recommend->add_option("--user", user, "Listening user id")->required();
  recommend->add_option("-k,--k", k, "Number of recommendations");
  recommend->add_option("--exclude", exclude, "Song ids to leave out");

  auto* provision = app.add_subcommand("provision-dyad", "Create a parent-child dyad and its login code");
  std::string dyad_id, parent, child, code;
  provision->add_option("--dyad", dyad_id, "Dyad id")->required();
  provision->add_option("--parent", parent, "Parent user id")->required();
  provision->add_option("--child", child, "Child user id")->required();
  provision->add_option("--code", code, "Login code (generated when omitted)");

  auto* set_playlist = app.add_subcommand("set-playlist", "Replace a user's favourite-song playlist");
  std::string id_file;
  std::vector<std::string> ids;
  set_playlist->add_option("--user", user, "User id")->required();
  set_playlist->add_option("--file", id_file, "File of song ids (JSON array or one per line)");
  set_playlist->add_option("ids", ids, "Song ids");

  auto* report = app.add_subcommand("report", "Weekly interaction report as CSV");
  int weeks = 4;
  std::string start;
  std::int64_t gap = -1;
  report->add_option("--dyad", dyad_id, "Dyad id")->required();
  report->add_option("--weeks", weeks, "Number of ISO weeks")->check(CLI::NonNegativeNumber);
  report->add_option("--start", start, "YYYY-MM-DD inside the first week (default: first activity)");
  report->add_option("--gap", gap, "Session gap threshold in seconds");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP gateway");
  std::string host;
  int port = -1;
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 = any free port)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  Config config;
  try {
    config = resolve_config(config_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_path));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsageError;
  }

  try {
    if (!data_dir.empty()) config.data_dir = data_dir;
    if (workers >= 0) config.workers = workers;
    if (!host.empty()) config.host = host;
    if (port >= 0) config.port = port;

    if (*featurize) {
      const auto& cfg = config.service.catalog.features;
      std::vector<std::string> lines(wav_files.size());
      std::atomic<bool> failed{false};
      parallel_for(wav_files.size(), worker_count(config.workers), [&](std::size_t i) {
        json line = {{"path", wav_files[i]}};
        try {
          const auto wav = audio::read_wav(wav_files[i]);
          dsp::AudioClipd clip{audio::resample_linear(wav.mono(), wav.sample_rate, cfg.sample_rate), cfg.sample_rate};
          const auto v = dsp::featurize(clip, cfg);
          line["fingerprint"] = v.config_fingerprint;
          line["values"] = std::vector<double>(v.values.data(), v.values.data() + v.values.size());
        } catch (const std::exception& e) {
          line["error"] = e.what();
          failed = true;
        }
        lines[i] = line.dump();
      });
      for (const auto& l : lines) out << l << '\n';
      return failed ? kExitDomainError : kExitOk;
    }

    std::optional<TimestampMs> start_at;
    if (*report && !start.empty()) {
      try {
        start_at = parse_utc_date(start);
      } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsageError;
      }
    }

    auto service = open_service(config);

    if (*ingest) {
      IngestSummary s;
      try {
        s = ingest_manifest(*service, manifest, config.workers, err);
      } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsageError;
      }
      out << json{{"ingested", s.ingested}, {"skipped", s.skipped}, {"failed", s.failed}}.dump() << '\n';
      return s.failed == 0 ? kExitOk : kExitDomainError;
    }
    if (*recommend) {
      const std::set<std::string> exclusions(exclude.begin(), exclude.end());
      out << recommendations_json(service->recommend(song, user, k, exclusions)) << '\n';
      return kExitOk;
    }
    if (*provision) {
      const auto d = service->provision_dyad(dyad_id, parent, child,
                                             code.empty() ? std::nullopt : std::optional<std::string>(code));
      out << json(d).dump() << '\n';
      return kExitOk;
    }
    if (*set_playlist) {
      if (!id_file.empty()) {
        const auto from_file = read_id_file(id_file);
        ids.insert(ids.begin(), from_file.begin(), from_file.end());
      }
      out << json(service->set_playlist(user, ids)).dump() << '\n';
      return kExitOk;
    }
    if (*report) {
      const auto dyad = service->dyad(dyad_id);
      const auto messages = service->messaging().messages(dyad.dyad_id);
      const auto playbacks = service->playback_log(dyad.dyad_id);
      TimestampMs from = service->now();
      if (start_at) {
        from = *start_at;
      } else if (auto first = first_activity(messages, playbacks)) {
        from = *first;
      }
      const std::int64_t gap_s = gap >= 0 ? gap : config.service.messaging.session_gap_s;
      out << to_csv(weekly_report(dyad, messages, playbacks, from, weeks, gap_s));
      return kExitOk;
    }
    if (*serve_cmd) return serve(*service, config, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsageError;
  }
  return kExitUsageError;
}

}  // namespace djfam::cli
