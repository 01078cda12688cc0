#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "djfam/gateway/service.hpp"

namespace httplib {
class Server;
}

namespace djfam::gateway {

struct HttpOptions {
  std::chrono::milliseconds max_long_poll{25'000};
  std::chrono::milliseconds stream_heartbeat{15'000};
  int worker_threads = 32;
};

/// JSON-over-HTTP API plus the event channel:
///   GET /v1/events?after=N&wait_ms=T  long-poll, returns {"events": [...]}
///   GET /v1/events/stream?after=N     chunked NDJSON push stream
class HttpServer {
 public:
  explicit HttpServer(Service& service, HttpOptions options = {});
  ~HttpServer();

  /// Binds to `host`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks.
  void run();
  void stop();
  bool running() const;

 private:
  void install_routes();

  Service& service_;
  HttpOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

/// HTTP status for a domain error.
int http_status(ErrorCode code);

}  // namespace djfam::gateway
