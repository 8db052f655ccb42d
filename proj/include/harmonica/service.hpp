#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "harmonica/pipeline.hpp"

namespace httplib {
class Server;
}

namespace harmonica::service {

using SteadyClock = std::chrono::steady_clock;

// Interactive editing session. The rest mesh and its operators never change;
// handle partition updates are exclusive, deforms run concurrently against a
// snapshot of the current Deformer.
class Session {
 public:
  Session(std::string id, Mesh mesh);

  const std::string& id() const { return id_; }
  const Model& model() const { return *model_; }

  // Replaces the partition, dropping all cached solver contexts and
  // recomputing harmonic weights.
  void set_handles(std::vector<std::string> names, std::vector<std::vector<int>> partition);

  // nullptr until handles are set.
  std::shared_ptr<const Deformer> deformer() const;
  std::vector<std::string> handle_names() const;

  DeformationOutput deform(const HandleSet& handles, double beta, OperatorKind kind) const;

  std::uint64_t factorizations() const;

  void touch() const;
  SteadyClock::time_point last_used() const;

 private:
  std::string id_;
  std::shared_ptr<const Model> model_;

  mutable std::shared_mutex mutex_;
  std::shared_ptr<const Deformer> deformer_;
  std::vector<std::string> names_;
  std::uint64_t retired_factorizations_ = 0;

  mutable std::mutex clock_mutex_;
  mutable SteadyClock::time_point last_used_;
};

class SessionStore {
 public:
  explicit SessionStore(std::chrono::seconds idle_timeout = std::chrono::minutes(30));

  std::shared_ptr<Session> create(Mesh mesh);
  std::shared_ptr<Session> find(const std::string& id);
  bool erase(const std::string& id);
  // Drops sessions idle for longer than the timeout; returns how many.
  std::size_t evict_idle(SteadyClock::time_point now = SteadyClock::now());
  std::size_t size() const;

 private:
  std::chrono::seconds idle_timeout_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

struct ServerOptions {
  std::string host = "0.0.0.0";
  int port = 8787;
  std::chrono::seconds idle_timeout = std::chrono::minutes(30);
  std::optional<std::filesystem::path> ui_dir;  // served under /ui
};

// HTTP/1.1 JSON API:
//   GET  /healthz
//   POST /sessions                       body: OBJ text
//   PUT  /sessions/{id}/handles          {"handles": [{"name", "vertices"}]}
//   GET  /sessions/{id}/weights
//   POST /sessions/{id}/deform           {"transforms": [...], "beta", "operator", "precision"}
//   DELETE /sessions/{id}
class Server {
 public:
  explicit Server(ServerOptions options = {});
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Blocks until stop(). Returns false if the port could not be bound.
  bool listen();
  // Binds an ephemeral port on `host` and returns it; then call listen_after_bind().
  int bind_any_port(const std::string& host = "127.0.0.1");
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

  SessionStore& sessions() { return store_; }

 private:
  void install_routes();

  ServerOptions options_;
  SessionStore store_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace harmonica::service
