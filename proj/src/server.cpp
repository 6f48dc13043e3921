#include "cpforge/server.hpp"

#include <filesystem>
#include <map>
#include <mutex>

#include "cpforge/active_learning.hpp"
#include "cpforge/clustering.hpp"
#include "cpforge/records.hpp"
#include "httplib.h"

namespace cpforge {

using json = nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownId: return 404;
    case ErrorCode::AlreadyLabeled: return 409;
    case ErrorCode::BudgetExhausted: return 410;
    case ErrorCode::PoolEmpty: return 422;
    case ErrorCode::IoError: return 500;
    default: return 400;
  }
}

namespace {

struct Session {
  Session(std::shared_ptr<const Dataset> dataset, std::span<const int> medoids, const SessionOptions& options)
      : al(std::move(dataset), medoids, options) {}

  std::mutex mu;
  ALSession al;
  std::vector<json> accuracy;  // one entry per label, null without a holdout
};

json accuracy_json(const ALSession& s) {
  const auto acc = s.holdout_accuracy();
  return acc ? json(*acc) : json(nullptr);
}

json status_json(const std::string& id, const Session& s) {
  return {{"session_id", id},
          {"queries_made", s.al.queries_made()},
          {"budget", s.al.budget()},
          {"holdout_accuracy", accuracy_json(s.al)},
          {"labeled", s.al.labeled().size()},
          {"pool", s.al.pool().size()},
          {"holdout", s.al.holdout().size()},
          {"accuracy_history", s.accuracy}};
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view name, const std::string& message) {
  send_json(res, status, {{"error", name}, {"message", message}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, http_status(e.code()), e.name(), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "ParseError", std::string("bad request body: ") + e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "InternalError", e.what());
  }
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body.empty() ? std::string("{}") : req.body);
  if (!body.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  return body;
}

template <typename T>
T field(const json& body, const char* key) {
  if (!body.contains(key)) throw Error(ErrorCode::MissingField, std::string("request field '") + key + "'");
  return body[key].get<T>();
}

}  // namespace

struct AnnotationService::Impl {
  ServiceOptions options;
  httplib::Server http;
  std::mutex mu;  // guards sessions, datasets and next_id
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::map<std::string, std::shared_ptr<const Dataset>> datasets;
  long next_id = 1;
  bool bound = false;

  explicit Impl(ServiceOptions opts) : options(std::move(opts)) { routes(); }

  std::shared_ptr<const Dataset> dataset(const std::string& path) {
    {
      std::lock_guard lock(mu);
      if (auto it = datasets.find(path); it != datasets.end()) return it->second;
    }
    auto loaded = std::make_shared<const Dataset>(read_dataset(path));
    std::lock_guard lock(mu);
    return datasets.emplace(path, std::move(loaded)).first->second;
  }

  std::pair<std::string, std::shared_ptr<Session>> session(const httplib::Request& req) {
    const std::string id = req.matches[1];
    std::lock_guard lock(mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw Error(ErrorCode::UnknownId, "no session '" + id + "'");
    return {id, it->second};
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const auto data = dataset(field<std::string>(body, "dataset"));
    std::string clusters = body.value("clusters", options.default_clusters);
    if (clusters.empty()) throw Error(ErrorCode::MissingField, "request field 'clusters'");
    const ClusterReport report = read_cluster_report(clusters);

    SessionOptions so;
    so.budget = body.value("budget", 200);
    so.seed = body.value("seed", std::uint64_t{0});
    so.holdout_frac = body.value("holdout_frac", options.holdout_frac);
    so.hyper = options.hyper;
    auto s = std::make_shared<Session>(data, report.medoid_ids, so);

    std::lock_guard lock(mu);
    const std::string id = std::to_string(next_id++);
    sessions.emplace(id, std::move(s));
    send_json(res, 201, {{"session_id", id}});
  }

  void query(const httplib::Request& req, httplib::Response& res) {
    auto [id, s] = session(req);
    std::lock_guard lock(s->mu);
    const int next = s->al.next_query();
    const auto& rec = s->al.record(next);
    send_json(res, 200,
              {{"session_id", id},
               {"segment_id", next},
               {"grid", grid_to_json(rec.grid)},
               {"features", features_to_json(rec.features)},
               {"queries_made", s->al.queries_made()},
               {"budget", s->al.budget()},
               {"holdout_accuracy", accuracy_json(s->al)}});
  }

  void label(const httplib::Request& req, httplib::Response& res) {
    auto [id, s] = session(req);
    const json body = parse_body(req);
    const int segment = field<int>(body, "segment_id");
    const Label label = parse_label(field<std::string>(body, "label"));
    std::lock_guard lock(s->mu);
    s->al.submit_label(segment, label);
    s->accuracy.push_back(accuracy_json(s->al));
    send_json(res, 200,
              {{"session_id", id},
               {"segment_id", segment},
               {"label", label_name(label)},
               {"queries_made", s->al.queries_made()},
               {"budget", s->al.budget()},
               {"holdout_accuracy", accuracy_json(s->al)},
               {"labeled", s->al.labeled().size()}});
  }

  void finish(const httplib::Request& req, httplib::Response& res) {
    auto [id, s] = session(req);
    std::lock_guard lock(s->mu);
    const std::filesystem::path dir(options.session_dir);
    const std::string model_path = (dir / ("session-" + id + "-model.txt")).string();
    const std::string labeled_path = (dir / ("session-" + id + "-labeled.jsonl")).string();
    save_model(s->al.model(), model_path);
    write_labeled(s->al.labeled_records(LabelSource::Human), labeled_path);
    send_json(res, 200,
              {{"session_id", id},
               {"model", model_path},
               {"labeled", labeled_path},
               {"queries_made", s->al.queries_made()}});
  }

  void routes() {
    http.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok", "text/plain");
    });
    http.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { create(req, res); });
    });
    http.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto [id, s] = session(req);
        std::lock_guard lock(s->mu);
        send_json(res, 200, status_json(id, *s));
      });
    });
    http.Get(R"(/sessions/([^/]+)/query)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { query(req, res); });
    });
    http.Post(R"(/sessions/([^/]+)/labels)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { label(req, res); });
    });
    http.Post(R"(/sessions/([^/]+)/finish)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { finish(req, res); });
    });
  }
};

AnnotationService::AnnotationService(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  if (!impl_->options.ui_dir.empty() && !impl_->http.set_mount_point("/ui", impl_->options.ui_dir))
    throw Error(ErrorCode::IoError, "cannot serve UI directory " + impl_->options.ui_dir);
}

AnnotationService::~AnnotationService() { stop(); }

int AnnotationService::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host + " to a free port");
  } else if (!impl_->http.bind_to_port(host, port)) {
    throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound;
}

void AnnotationService::run() {
  if (!impl_->bound) throw Error(ErrorCode::InvalidArgument, "bind() must succeed before run()");
  impl_->http.listen_after_bind();
}

void AnnotationService::start() {
  if (!impl_->bound) throw Error(ErrorCode::InvalidArgument, "bind() must succeed before start()");
  thread_ = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

void AnnotationService::stop() {
  if (impl_) impl_->http.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace cpforge
