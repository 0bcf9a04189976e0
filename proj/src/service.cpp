#include "roi/service.hpp"

#include <httplib.h>

#include <map>
#include <mutex>
#include <random>
#include <regex>
#include <shared_mutex>

#include "roi/random.hpp"

namespace roi {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Session {
  std::string id;
  GrayImage image;
  std::optional<GroundTruth> truth;
  std::mutex mu;  // serializes work on this session
  Clock::time_point last_access;
  std::map<std::string, PreparedImage> prepared;  // keyed by features + effective config
};

Service::Response error(int status, const std::string& msg) { return {status, json{{"error", msg}}}; }

bool valid_model_id(const std::string& id) {
  static const std::regex re("[A-Za-z0-9_.-]{1,128}");
  return std::regex_match(id, re) && id.find("..") == std::string::npos;
}

}  // namespace

struct Service::Impl {
  ServiceOptions opt;
  httplib::Server server;
  int bound_port = -1;

  mutable std::mutex sessions_mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;

  std::mutex models_mu;
  std::map<std::string, std::shared_ptr<const TrainedModel>> models;

  std::mutex id_mu;
  Rng id_rng{std::random_device{}() ^ (static_cast<std::uint64_t>(std::random_device{}()) << 32)};

  std::string new_id() {
    std::lock_guard lock(id_mu);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(id_rng.next()),
                  static_cast<unsigned long long>(id_rng.next()));
    return buf;
  }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(sessions_mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) return nullptr;
    return it->second;
  }

  std::shared_ptr<const TrainedModel> model_by_id(const std::string& id) {
    if (!valid_model_id(id) || opt.model_dir.empty()) return nullptr;
    std::lock_guard lock(models_mu);
    if (auto it = models.find(id); it != models.end()) return it->second;
    const auto path = opt.model_dir / (id + ".json");
    if (!std::filesystem::exists(path)) return nullptr;
    auto m = std::make_shared<const TrainedModel>(load_model(path));
    models.emplace(id, m);
    return m;
  }

  const PreparedImage& prepared_for(Session& s, FeatureKind kind, const PipelineConfig& eff) {
    const std::string key = std::string(to_string(kind)) + "|" + config_to_json(eff).dump();
    auto it = s.prepared.find(key);
    if (it == s.prepared.end()) it = s.prepared.emplace(key, prepare_image(s.image, kind, eff)).first;
    return it->second;
  }

  void install_routes(Service& self);
};

Service::Service(ServiceOptions opt) : impl_(std::make_unique<Impl>()) {
  opt.pipeline.validate();
  impl_->opt = std::move(opt);
  impl_->install_routes(*this);
}

Service::~Service() { stop(); }

Service::Response Service::create_session(std::span<const std::uint8_t> image,
                                          std::optional<std::span<const std::uint8_t>> mask) {
  evict_expired();
  if (image.size() > impl_->opt.max_upload_bytes || (mask && mask->size() > impl_->opt.max_upload_bytes))
    return error(413, "upload exceeds the size limit");
  auto s = std::make_shared<Session>();
  try {
    s->image = decode_image(image);
    require_pipeline_size(s->image);
  } catch (const DataError& e) {
    return error(400, std::string("image: ") + e.what());
  }
  if (mask) {
    try {
      const GrayImage m = decode_image(*mask);
      if (m.width() != s->image.width() || m.height() != s->image.height())
        return error(400, "mask dimensions do not match the image");
      s->truth.emplace(Mask::from_image(m));
    } catch (const DataError& e) {
      return error(400, std::string("mask: ") + e.what());
    }
  }
  s->id = impl_->new_id();
  s->last_access = Clock::now();
  {
    std::lock_guard lock(impl_->sessions_mu);
    impl_->sessions.emplace(s->id, s);
  }
  return {201, json{{"id", s->id}, {"width", s->image.width()}, {"height", s->image.height()},
                    {"has_mask", s->truth.has_value()}}};
}

Service::Response Service::keypoints(const std::string& session_id, const std::string& features) {
  evict_expired();
  auto s = impl_->find(session_id);
  if (!s) return error(404, "unknown session");
  FeatureKind kind;
  try {
    kind = parse_feature_kind(features.empty() ? "surf" : features);
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }
  std::lock_guard lock(s->mu);
  s->last_access = Clock::now();
  const PreparedImage& p = impl_->prepared_for(*s, kind, impl_->opt.pipeline);
  json out = json::array();
  for (const auto& f : p.features) out.push_back(to_json(f.kp));
  return {200, out};
}

Service::Response Service::segment(const std::string& session_id, const json& req) {
  evict_expired();
  auto s = impl_->find(session_id);
  if (!s) return error(404, "unknown session");
  if (!req.is_object()) return error(400, "request body must be a JSON object");

  double cx, cy;
  FeatureKind features;
  ClassifierKind classifier;
  std::uint64_t cluster_seed = impl_->opt.cluster_seed;
  try {
    if (!req.contains("cx") || !req.contains("cy")) return error(400, "cx and cy are required");
    cx = req.at("cx").get<double>();
    cy = req.at("cy").get<double>();
    features = parse_feature_kind(req.value("features", std::string("surf")));
    classifier = parse_classifier_kind(req.value("classifier", std::string("svm")));
    if (req.contains("seed")) cluster_seed = req.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    return error(400, e.what());
  } catch (const ConfigError& e) {
    return error(400, e.what());
  }
  if (!(cx >= 0 && cy >= 0 && cx < s->image.width() && cy < s->image.height()))
    return error(422, "click is outside the image");

  std::shared_ptr<const TrainedModel> model;
  if (req.contains("model") && !req.at("model").is_null()) {
    const auto& jm = req.at("model");
    try {
      if (jm.is_string()) {
        model = impl_->model_by_id(jm.get<std::string>());
        if (!model) return error(404, "unknown model '" + jm.get<std::string>() + "'");
      } else {
        model = std::make_shared<const TrainedModel>(model_from_json(jm));
      }
    } catch (const DataError& e) {
      return error(400, e.what());
    }
  }
  if (classifier == ClassifierKind::svm && !model) return error(409, "the svm classifier needs a model");

  PipelineConfig eff = effective_config(impl_->opt.pipeline, model.get());
  if (model && classifier == ClassifierKind::svm) features = model->features;
  const AspectStats aspect = model ? model->aspect : AspectStats{};

  std::lock_guard lock(s->mu);
  s->last_access = Clock::now();
  try {
    const PreparedImage& p = impl_->prepared_for(*s, features, eff);
    const Segmentation seg = segment_prepared(p, {cx, cy, SeedPoint::Source::user_click}, classifier,
                                              model.get(), aspect, eff, cluster_seed);
    std::optional<DiceScore> score;
    if (s->truth) score = dice(rasterize(seg.ellipse, s->image.width(), s->image.height()), s->truth->mask());
    json out = segmentation_to_json(seg, features, classifier, score);
    return {200, out};
  } catch (const InsufficientEvidence& e) {
    return error(422, e.what());
  } catch (const DataError& e) {
    return error(400, e.what());
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
}

std::size_t Service::evict_expired() {
  const auto now = Clock::now();
  std::lock_guard lock(impl_->sessions_mu);
  std::size_t n = 0;
  for (auto it = impl_->sessions.begin(); it != impl_->sessions.end();) {
    if (now - it->second->last_access > impl_->opt.session_ttl) {
      it = impl_->sessions.erase(it);
      ++n;
    } else {
      ++it;
    }
  }
  return n;
}

std::size_t Service::session_count() const {
  std::lock_guard lock(impl_->sessions_mu);
  return impl_->sessions.size();
}

// ---------------------------------------------------------------------------
// HTTP wiring

void Service::Impl::install_routes(Service& self) {
  server.set_payload_max_length(opt.max_upload_bytes + (std::size_t{1} << 16));
  const int threads = std::max(1, opt.threads);
  server.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  server.set_default_headers({{"Access-Control-Allow-Origin", opt.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});

  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };

  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/health", [reply](const httplib::Request&, httplib::Response& res) {
    reply(res, {200, json{{"status", "ok"}}});
  });

  server.Post("/sessions", [&self, reply](const httplib::Request& req, httplib::Response& res) {
    auto bytes = [](const std::string& s) {
      return std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
    };
    if (req.is_multipart_form_data()) {
      if (!req.has_file("image")) return reply(res, error(400, "multipart field 'image' is required"));
      const auto image = req.get_file_value("image");
      std::optional<std::span<const std::uint8_t>> mask;
      httplib::MultipartFormData mask_part;
      if (req.has_file("mask")) {
        mask_part = req.get_file_value("mask");
        mask = bytes(mask_part.content);
      }
      return reply(res, self.create_session(bytes(image.content), mask));
    }
    reply(res, self.create_session(bytes(req.body), std::nullopt));
  });

  server.Get(R"(/sessions/([0-9a-f]+)/keypoints)", [&self, reply](const httplib::Request& req, httplib::Response& res) {
    const std::string features = req.has_param("features") ? req.get_param_value("features") : "surf";
    reply(res, self.keypoints(req.matches[1], features));
  });

  server.Post(R"(/sessions/([0-9a-f]+)/segment)", [&self, reply](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      return reply(res, error(400, std::string("malformed JSON: ") + e.what()));
    }
    reply(res, self.segment(req.matches[1], body));
  });

  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const char* msg = res.status == 413 ? "upload exceeds the size limit" : "not found";
      res.set_content(json{{"error", res.status == 404 ? "not found" : msg}}.dump(), "application/json");
    }
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", msg}}.dump(), "application/json");
  });
}

int Service::bind() {
  if (impl_->opt.port == 0)
    impl_->bound_port = impl_->server.bind_to_any_port(impl_->opt.host);
  else
    impl_->bound_port = impl_->server.bind_to_port(impl_->opt.host, impl_->opt.port) ? impl_->opt.port : -1;
  return impl_->bound_port;
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

bool Service::listen() { return bind() >= 0 && listen_after_bind(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace roi
