#include "djfam/gateway/http_server.hpp"

#include <fstream>
#include <thread>

#include "djfam/common/error.hpp"
#include "httplib.h"

namespace djfam::gateway {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kConflict:
      return 400;
    case ErrorCode::kUnauthenticated: return 401;
    case ErrorCode::kPermissionDenied: return 403;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kIo: return 500;
  }
  return 500;
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, {{"code", to_string(code)}, {"message", message}}, http_status(code));
}

json parse_body(const httplib::Request& req) {
  auto body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.is_object()) fail(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  return body;
}

std::string required_string(const json& body, const char* field) {
  if (!body.contains(field) || !body[field].is_string()) {
    fail(ErrorCode::kInvalidArgument, std::string("field '") + field + "' must be a string");
  }
  return body[field].get<std::string>();
}

std::int64_t int_param(const httplib::Request& req, const char* name, std::int64_t fallback) {
  if (!req.has_param(name)) return fallback;
  const auto text = req.get_param_value(name);
  try {
    std::size_t used = 0;
    const auto v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(name);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::kInvalidArgument, std::string("query parameter '") + name + "' must be an integer");
  }
}

}  // namespace

HttpServer::HttpServer(Service& service, HttpOptions options)
    : service_(service), options_(options), server_(std::make_unique<httplib::Server>()) {
  const int threads = options_.worker_threads;
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  if (!server_->bind_to_port(host, port)) fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::run() { server_->listen_after_bind(); }

void HttpServer::stop() {
  service_.events().shutdown();
  if (server_) server_->stop();
}

bool HttpServer::running() const { return server_->is_running(); }

void HttpServer::install_routes() {
  auto& svr = *server_;
  Service& service = service_;

  // Wraps a handler with error mapping; `authed` handlers get the session.
  auto handle = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const json::exception& e) {
        send_error(res, ErrorCode::kInvalidArgument, e.what());
      } catch (const std::exception& e) {
        send_error(res, ErrorCode::kIo, e.what());
      }
    };
  };
  auto session_of = [&service](const httplib::Request& req) {
    std::string token = req.get_header_value("Authorization");
    if (token.rfind("Bearer ", 0) == 0) token = token.substr(7);
    if (token.empty()) fail(ErrorCode::kUnauthenticated, "missing Authorization header");
    return service.authenticate(token);
  };

  svr.Post("/v1/login", handle([&service](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             const auto s = service.login(required_string(body, "dyad_code"), required_string(body, "role"));
             send_json(res, {{"token", s.token},
                             {"user_id", s.user_id},
                             {"dyad_id", s.dyad_id},
                             {"role", to_string(s.role)},
                             {"expires_at", s.expires_at}});
           }));

  svr.Get(R"(/v1/playlist/(self|partner))",
          handle([&service, session_of](const httplib::Request& req, httplib::Response& res) {
            const auto s = session_of(req);
            send_json(res, {{"songs", service.playlist_summaries(s, req.matches[1] == "partner")}});
          }));

  svr.Post("/v1/playback", handle([&service, session_of](const httplib::Request& req, httplib::Response& res) {
             const auto s = session_of(req);
             const auto body = parse_body(req);
             send_json(res, service.now_playing(s, required_string(body, "song_id")));
           }));

  svr.Get("/v1/playback", handle([&service, session_of](const httplib::Request& req, httplib::Response& res) {
            const auto s = session_of(req);
            auto state = service.playback_state(s.user_id);
            if (!state) fail(ErrorCode::kNotFound, "nothing playing");
            send_json(res, *state);
          }));

  svr.Get(R"(/v1/songs/([^/]+)/audio)",
          handle([&service, session_of](const httplib::Request& req, httplib::Response& res) {
            session_of(req);
            const auto song = service.catalog().song(req.matches[1]);
            const std::string path = song.audio_path;
            std::error_code ec;
            const auto size = std::filesystem::file_size(path, ec);
            if (ec) fail(ErrorCode::kNotFound, "audio file missing for '" + song.id + "'");
            res.set_content_provider(
                static_cast<std::size_t>(size), "audio/wav",
                [path](std::size_t offset, std::size_t length, httplib::DataSink& sink) {
                  std::ifstream in(path, std::ios::binary);
                  in.seekg(static_cast<std::streamoff>(offset));
                  std::vector<char> buf(std::min<std::size_t>(length, 1 << 16));
                  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
                  const auto got = static_cast<std::size_t>(in.gcount());
                  if (got == 0) return false;
                  return sink.write(buf.data(), got);
                });
          }));

  svr.Get(R"(/v1/songs/([^/]+)/info)",
          handle([&service, session_of](const httplib::Request& req, httplib::Response& res) {
            session_of(req);
            std::optional<SongId> source;
            if (req.has_param("source") && !req.get_param_value("source").empty()) source = req.get_param_value("source");
            const bool full = req.has_param("full_lyrics") && req.get_param_value("full_lyrics") != "0";
            send_json(res, service.music_info(req.matches[1], source, full));
          }));

  svr.Post("/v1/messages", handle([&service, session_of](const httplib::Request& req, httplib::Response& res) {
             const auto s = session_of(req);
             const auto body = parse_body(req);
             const auto client_id = required_string(body, "client_msg_id");
             const auto kind = messaging::message_kind_from(body.value("kind", "text"));
             if (kind == messaging::MessageKind::kText) {
               send_json(res, service.post_text(s, client_id, required_string(body, "body")));
               return;
             }
             if (!body.contains("recommendation_ref") || !body["recommendation_ref"].is_object()) {
               fail(ErrorCode::kInvalidArgument, "song_share requires recommendation_ref");
             }
             const auto& ref = body["recommendation_ref"];
             send_json(res, service.share(s, client_id, required_string(ref, "source_song_id"),
                                          required_string(ref, "recommended_song_id")));
           }));

  svr.Get("/v1/messages", handle([&service, session_of](const httplib::Request& req, httplib::Response& res) {
            const auto s = session_of(req);
            send_json(res, {{"messages", service.fetch(s, int_param(req, "since_seq", 0))}});
          }));

  svr.Get("/v1/reports/sessions",
          handle([&service, session_of](const httplib::Request& req, httplib::Response& res) {
            const auto s = session_of(req);
            messaging::TimeWindow window{int_param(req, "from", 0), int_param(req, "to", service.now() + 1)};
            std::optional<std::int64_t> gap;
            if (req.has_param("gap")) gap = int_param(req, "gap", 0);
            send_json(res, service.session_report(s, window, gap));
          }));

  const auto max_poll = options_.max_long_poll;
  svr.Get("/v1/events", handle([&service, session_of, max_poll](const httplib::Request& req, httplib::Response& res) {
            const auto s = session_of(req);
            const auto wait = std::min(std::chrono::milliseconds(int_param(req, "wait_ms", 0)), max_poll);
            const auto events = service.events().poll(s.user_id, int_param(req, "after", 0), wait);
            send_json(res, {{"events", events}});
          }));

  const auto heartbeat = options_.stream_heartbeat;
  svr.Get("/v1/events/stream",
          handle([&service, session_of, heartbeat](const httplib::Request& req, httplib::Response& res) {
            const auto s = session_of(req);
            auto cursor = std::make_shared<std::int64_t>(int_param(req, "after", 0));
            auto presence = std::make_shared<EventHub::Connection>(service.events(), s.user_id);
            res.set_chunked_content_provider(
                "application/x-ndjson",
                [&service, user = s.user_id, cursor, presence, heartbeat](std::size_t, httplib::DataSink& sink) {
                  if (service.events().is_shut_down()) return false;
                  const auto events = service.events().poll(user, *cursor, heartbeat);
                  if (events.empty()) {
                    // Blank line keeps the connection alive and detects hang-ups.
                    return sink.write("\n", 1);
                  }
                  std::string chunk;
                  for (const auto& e : events) {
                    chunk += json(e).dump();
                    chunk += '\n';
                    *cursor = e.id;
                  }
                  return sink.write(chunk.data(), chunk.size());
                },
                [presence](bool) {});
          }));
}

}  // namespace djfam::gateway
