#include "harmonica/service.hpp"

#include <cstring>
#include <random>

#include <httplib.h>
#include <json.hpp>

#include "harmonica/error.hpp"

namespace harmonica::service {
namespace {

using nlohmann::json;

struct HttpError {
  int status;
  std::string message;
};

std::string random_suffix() {
  static std::mutex mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mutex);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return std::string(buf, 8);
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return 500;
    default: return 422;
  }
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, json{{"error", message}});
}

template <typename F>
void handle(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const HttpError& e) {
    reply_error(res, e.status, e.message);
  } catch (const Error& e) {
    reply_error(res, status_for(e.code()), e.what());
  } catch (const json::exception& e) {
    reply_error(res, 400, std::string("invalid JSON: ") + e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, e.what());
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) throw HttpError{400, "empty request body"};
  return json::parse(req.body);
}

Vec3 vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw HttpError{422, std::string(what) + " must be [x, y, z]"};
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

HandleTransform read_transform(const json& j) {
  HandleTransform tf;
  if (j.contains("quaternion")) {
    const auto& q = j.at("quaternion");
    if (!q.is_array() || q.size() != 4) throw HttpError{422, "quaternion must be [w, x, y, z]"};
    tf.rotation = Quaternion(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
  }
  if (j.contains("translation")) tf.translation = vec3(j.at("translation"), "translation");
  if (j.contains("scale")) tf.scale = j.at("scale").get<double>();
  if (j.contains("pivot")) tf.pivot = vec3(j.at("pivot"), "pivot");
  return tf;
}

template <typename Real>
std::string encode_positions(const Positions& p) {
  std::string bytes(static_cast<std::size_t>(p.rows()) * 3 * sizeof(Real), '\0');
  std::size_t offset = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const Real f = static_cast<Real>(p(i, c));
      std::memcpy(bytes.data() + offset, &f, sizeof f);
      offset += sizeof f;
    }
  }
  return httplib::detail::base64_encode(bytes);
}

std::string encode_colors(const std::vector<Rgb>& colors) {
  std::string bytes;
  bytes.reserve(colors.size() * 3);
  for (const auto& c : colors)
    for (auto ch : c) bytes.push_back(static_cast<char>(ch));
  return httplib::detail::base64_encode(bytes);
}

json bbox_json(const Mesh& mesh) {
  const Vec3 lo = mesh.bbox_min(), hi = mesh.bbox_max();
  return json{{"min", {lo.x(), lo.y(), lo.z()}}, {"max", {hi.x(), hi.y(), hi.z()}}, {"diagonal", mesh.bbox_diagonal()}};
}

}  // namespace

Session::Session(std::string id, Mesh mesh)
    : id_(std::move(id)), model_(std::make_shared<Model>(std::move(mesh))), last_used_(SteadyClock::now()) {}

void Session::set_handles(std::vector<std::string> names, std::vector<std::vector<int>> partition) {
  validate_partition(partition, model_->mesh().vertex_count());
  auto next = std::make_shared<const Deformer>(model_, std::move(partition));
  std::unique_lock lock(mutex_);
  if (deformer_) retired_factorizations_ += deformer_->factorization_count();
  deformer_ = std::move(next);
  names_ = std::move(names);
}

std::shared_ptr<const Deformer> Session::deformer() const {
  std::shared_lock lock(mutex_);
  return deformer_;
}

std::vector<std::string> Session::handle_names() const {
  std::shared_lock lock(mutex_);
  return names_;
}

DeformationOutput Session::deform(const HandleSet& handles, double beta, OperatorKind kind) const {
  const auto d = deformer();
  if (!d) throw Error(ErrorCode::InvalidHandles, "handles have not been set");
  return d->deform(handles, beta, kind);
}

std::uint64_t Session::factorizations() const {
  std::shared_lock lock(mutex_);
  return retired_factorizations_ + (deformer_ ? deformer_->factorization_count() : 0);
}

void Session::touch() const {
  std::lock_guard lock(clock_mutex_);
  last_used_ = SteadyClock::now();
}

SteadyClock::time_point Session::last_used() const {
  std::lock_guard lock(clock_mutex_);
  return last_used_;
}

SessionStore::SessionStore(std::chrono::seconds idle_timeout) : idle_timeout_(idle_timeout) {}

std::shared_ptr<Session> SessionStore::create(Mesh mesh) {
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(next_id_++) + "-" + random_suffix();
  }
  auto session = std::make_shared<Session>(id, std::move(mesh));
  std::lock_guard lock(mutex_);
  sessions_.emplace(id, session);
  return session;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  it->second->touch();
  return it->second;
}

bool SessionStore::erase(const std::string& id) {
  std::lock_guard lock(mutex_);
  return sessions_.erase(id) > 0;
}

std::size_t SessionStore::evict_idle(SteadyClock::time_point now) {
  std::lock_guard lock(mutex_);
  std::size_t evicted = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second->last_used() > idle_timeout_) {
      it = sessions_.erase(it);
      ++evicted;
    } else {
      ++it;
    }
  }
  return evicted;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

Server::Server(ServerOptions options)
    : options_(std::move(options)), store_(options_.idle_timeout), http_(std::make_unique<httplib::Server>()) {
  install_routes();
}

Server::~Server() { stop(); }

bool Server::listen() { return http_->listen(options_.host, options_.port); }

int Server::bind_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool Server::listen_after_bind() { return http_->listen_after_bind(); }

void Server::stop() {
  if (http_) http_->stop();
}

void Server::wait_until_ready() const { http_->wait_until_ready(); }

void Server::install_routes() {
  auto& http = *http_;

  http.set_pre_routing_handler([this](const httplib::Request&, httplib::Response&) {
    store_.evict_idle();
    return httplib::Server::HandlerResponse::Unhandled;
  });

  if (options_.ui_dir) {
    http.set_mount_point("/ui", options_.ui_dir->string());
  } else {
    http.Get(R"(/ui/?)", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("<!doctype html><title>harmonica</title><p>No viewer bundle configured; start the server "
                      "with --ui-dir pointing at the built viewer.</p>\n",
                      "text/html");
    });
  }

  http.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, json{{"status", "ok"}}); });

  http.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] {
      if (req.body.empty()) throw HttpError{400, "empty request body; expected OBJ text"};
      Mesh mesh = parse_obj(req.body);
      auto session = store_.create(std::move(mesh));
      const auto& m = session->model().mesh();
      reply(res, 201, json{{"id", session->id()},
                           {"vertices", m.vertex_count()},
                           {"triangles", m.triangle_count()},
                           {"bbox", bbox_json(m)}});
    });
  });

  const auto find = [this](const httplib::Request& req) {
    auto session = store_.find(req.matches[1]);
    if (!session) throw HttpError{404, "unknown session '" + std::string(req.matches[1]) + "'"};
    return session;
  };

  http.Delete(R"(/sessions/([A-Za-z0-9-]+))", [this](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] {
      if (!store_.erase(req.matches[1])) throw HttpError{404, "unknown session"};
      reply(res, 200, json{{"deleted", std::string(req.matches[1])}});
    });
  });

  http.Put(R"(/sessions/([A-Za-z0-9-]+)/handles)", [find](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] {
      auto session = find(req);
      const json body = parse_body(req);
      if (!body.contains("handles") || !body.at("handles").is_array())
        throw HttpError{400, "expected {\"handles\": [...]}"};
      std::vector<std::string> names;
      std::vector<std::vector<int>> partition;
      for (const auto& h : body.at("handles")) {
        names.push_back(h.value("name", "handle" + std::to_string(names.size())));
        if (!h.contains("vertices") || !h.at("vertices").is_array()) throw HttpError{400, "handle needs 'vertices'"};
        partition.push_back(h.at("vertices").get<std::vector<int>>());
      }
      session->set_handles(names, std::move(partition));
      reply(res, 200, json{{"handles", names}, {"factorizations", session->factorizations()}});
    });
  });

  http.Get(R"(/sessions/([A-Za-z0-9-]+)/weights)", [find](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] {
      auto session = find(req);
      const auto d = session->deformer();
      if (!d) throw HttpError{409, "handles have not been set"};
      const auto& w = d->weights().vertex;
      json rows = json::array();
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < w.cols(); ++k) row.push_back(w(i, k));
        rows.push_back(std::move(row));
      }
      reply(res, 200, json{{"handles", session->handle_names()}, {"weights", std::move(rows)}});
    });
  });

  http.Post(R"(/sessions/([A-Za-z0-9-]+)/deform)", [find](const httplib::Request& req, httplib::Response& res) {
    handle(res, [&] {
      auto session = find(req);
      const json body = parse_body(req);
      const auto d = session->deformer();
      if (!d) throw HttpError{409, "handles have not been set"};

      const double beta = body.value("beta", 0.2);
      if (!(beta >= 0.0 && beta < 1.0)) throw HttpError{422, "beta must lie in [0, 1)"};
      const std::string op = body.value("operator", "curved");
      if (op != "flat" && op != "curved") throw HttpError{422, "operator must be 'flat' or 'curved'"};
      const OperatorKind kind = op == "flat" ? OperatorKind::Flat : OperatorKind::Curved;
      const std::string precision = body.value("precision", "float32");
      if (precision != "float32" && precision != "float64")
        throw HttpError{422, "precision must be 'float32' or 'float64'"};

      const auto names = session->handle_names();
      HandleSet handles;
      for (std::size_t k = 0; k < d->handle_vertices().size(); ++k)
        handles.handles.push_back({names[k], d->handle_vertices()[k], {}});
      if (body.contains("transforms")) {
        const auto& tfs = body.at("transforms");
        if (!tfs.is_array()) throw HttpError{400, "'transforms' must be an array"};
        for (std::size_t i = 0; i < tfs.size(); ++i) {
          std::size_t k = i;
          if (tfs[i].contains("handle")) {
            const auto& ref = tfs[i].at("handle");
            if (ref.is_number_integer()) {
              k = ref.get<std::size_t>();
            } else {
              const auto it = std::find(names.begin(), names.end(), ref.get<std::string>());
              if (it == names.end()) throw HttpError{422, "unknown handle '" + ref.get<std::string>() + "'"};
              k = static_cast<std::size_t>(it - names.begin());
            }
          }
          if (k >= handles.size()) throw HttpError{422, "transform refers to a missing handle"};
          handles.handles[k].transform = read_transform(tfs[i]);
        }
      }

      const auto out = d->deform(handles, beta, kind);
      double clip = 0.0;
      const auto colors = colormap(out.energy, &clip);
      reply(res, 200,
            json{{"positions", precision == "float64" ? encode_positions<double>(out.positions)
                                                      : encode_positions<float>(out.positions)},
                 {"positions_encoding", "base64-" + precision + "-le"},
                 {"energy", out.energy},
                 {"p95", clip},
                 {"colors", encode_colors(colors)},
                 {"max_iso", out.errors.max_isometric},
                 {"max_conf", out.errors.max_conformal},
                 {"energies", {{"e_p", out.energies.prescribed}, {"e_r", out.energies.regularizer}, {"e_beta", out.energies.total}}},
                 {"timings", {{"factorize_ms", out.factorize_ms}, {"solve_ms", out.solve_ms}}},
                 {"cache_hit", out.cache_hit},
                 {"factorizations", session->factorizations()}});
    });
  });
}

}  // namespace harmonica::service
