#pragma once

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "djfam/gateway/http_server.hpp"
#include "djfam/gateway/service.hpp"
#include "fixtures.hpp"
#include "httplib.h"

namespace djfam::test {

/// A provisioned dyad ("mom" and "kid") whose playlists hold synthetic songs.
struct DyadWorld {
  explicit DyadWorld(int songs_each = 8, gateway::ServiceOptions options = {}, double seconds = 0.5)
      : service(std::make_unique<gateway::Service>(gateway::Stores::in_memory(), options, clock.clock())) {
    parent_songs = ingest_synthetic(service->catalog(), dir, "p", songs_each, 1000, seconds, 1985);
    child_songs = ingest_synthetic(service->catalog(), dir, "c", songs_each, 2000, seconds, 2015);
    service->provision_dyad("d1", "mom", "kid", std::string("CODE1234"));
    service->set_playlist("mom", parent_songs);
    service->set_playlist("kid", child_songs);
  }

  TempDir dir;
  ManualClock clock;
  std::unique_ptr<gateway::Service> service;
  std::vector<catalog::SongId> parent_songs, child_songs;
};

/// Runs an HttpServer on an ephemeral port for the lifetime of the object.
class RunningServer {
 public:
  explicit RunningServer(gateway::Service& service, gateway::HttpOptions options = {})
      : server_(service, options), port_(server_.bind("127.0.0.1", 0)), thread_([this] { server_.run(); }) {
    while (!server_.running()) std::this_thread::yield();
  }
  ~RunningServer() {
    server_.stop();
    thread_.join();
  }

  int port() const { return port_; }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }

 private:
  gateway::HttpServer server_;
  int port_;
  std::thread thread_;
};

inline httplib::Headers bearer(const std::string& token) { return {{"Authorization", "Bearer " + token}}; }

}  // namespace djfam::test
