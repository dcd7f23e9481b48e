#include <httplib.h>

#include "contraforge/annotation_server.hpp"

#include <thread>

#include <spdlog/spdlog.h>

#include "contraforge/record_log.hpp"

namespace contraforge {

using nlohmann::json;

json to_json(const AgreementReport& r) {
  json j;
  j["percent_agreement"] = r.percent_agreement;
  j["cohen_kappa"] = r.cohen_kappa ? json(*r.cohen_kappa) : json(nullptr);
  j["kripp_alpha"] = r.kripp_alpha ? json(*r.kripp_alpha) : json(nullptr);
  j["n_items"] = r.n_items;
  j["n_annotators"] = r.n_annotators;
  j["reason"] = r.reason;
  return j;
}

json to_json(const ReviewSummary& s) {
  json j;
  j["n_reviews"] = s.n_reviews;
  j["means"] = {{"fluency", s.fluency},
                {"specificity", s.specificity},
                {"coherence", s.coherence},
                {"legitimacy", s.legitimacy}};
  j["detection_rate"] = s.detection_rate ? json(*s.detection_rate) : json(nullptr);
  return j;
}

struct AnnotationServer::Impl {
  AnnotationService& service;
  ServerOptions options;
  httplib::Server http;
  std::thread worker;
  int port = 0;

  Impl(AnnotationService& s, ServerOptions o) : service(s), options(std::move(o)) { routes(); }

  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static json parse_body(const httplib::Request& req) {
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw PreconditionError("body must be a JSON object");
    return j;
  }

  static std::string str_field(const json& j, const char* name) {
    if (!j.contains(name) || !j[name].is_string()) {
      throw PreconditionError(std::string("field '") + name + "' must be a string");
    }
    return j[name].get<std::string>();
  }

  static int label_field(const json& j) {
    if (!j.contains("label")) throw PreconditionError("field 'label' is required");
    const auto& v = j["label"];
    if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
    if (!v.is_number_integer()) throw PreconditionError("field 'label' must be 0 or 1");
    return v.get<int>();
  }

  // Maps library errors onto HTTP statuses.
  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      if (options.token && req.get_header_value("X-Forge-Token") != *options.token) {
        reply(res, 401, {{"error", "missing or wrong X-Forge-Token"}});
        return;
      }
      try {
        f(req, res);
      } catch (const PermissionDenied& e) {
        reply(res, 403, {{"error", e.what()}});
      } catch (const NotFound& e) {
        reply(res, 404, {{"error", e.what()}});
      } catch (const ValidationError& e) {
        reply(res, 400, {{"error", e.what()}});
      } catch (const std::exception& e) {
        spdlog::error("annotation API failure: {}", e.what());
        reply(res, 500, {{"error", e.what()}});
      }
    };
  }

  static std::optional<Mode> mode_param(const httplib::Request& req) {
    if (!req.has_param("mode")) return std::nullopt;
    auto m = parse_mode(req.get_param_value("mode"));
    if (!m) throw PreconditionError("mode must be self or pairwise");
    return m;
  }

  void routes() {
    http.Get("/api/queue/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string annotator = req.get_param_value("annotator");
      auto item = service.next_item(annotator);
      if (!item) {
        res.status = 204;
        return;
      }
      reply(res, 200, json(*item));
    }));

    http.Post("/api/labels", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      auto r = service.submit_label(str_field(body, "annotator"), str_field(body, "key"),
                                    label_field(body));
      reply(res, 201, json(r));
    }));

    http.Get(R"(/api/items/([0-9A-Za-z_\-]+))",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const std::string key = req.matches[1];
               auto item = service.item(key);
               if (!item) throw NotFound("unknown item '" + key + "'");
               json j = *item;
               const auto labels = service.item_labels(key);
               j["labels"] = labels->by_annotator;
               j["agreement"] = labels->agreement;
               reply(res, 200, j);
             }));

    http.Get("/api/iaa", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto mode = mode_param(req);
      json j;
      try {
        j = to_json(service.iaa(mode));
      } catch (const PreconditionError& e) {
        AgreementReport empty;
        empty.reason = e.what();
        j = to_json(empty);
        j["percent_agreement"] = nullptr;
      }
      j["mode"] = mode ? json(std::string(to_string(*mode))) : json(nullptr);
      j["adjudication_queue"] = service.adjudication_queue().size();
      reply(res, 200, j);
    }));

    http.Get("/api/adjudication", guarded([this](const httplib::Request&, httplib::Response& res) {
      json items = json::array();
      for (const auto& g : service.adjudication_queue()) {
        json j = g;
        j["labels"] = service.item_labels(g.key)->by_annotator;
        items.push_back(std::move(j));
      }
      reply(res, 200, items);
    }));

    http.Post("/api/adjudication", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      auto r = service.adjudicate(str_field(body, "sme"), str_field(body, "key"), label_field(body));
      reply(res, 201, json(r));
    }));

    http.Post("/api/reviews", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      if (!body.contains("likert") || !body["likert"].is_object()) {
        throw PreconditionError("field 'likert' must be an object");
      }
      LikertScores l;
      const auto& lj = body["likert"];
      const auto rating = [&](const char* name) {
        if (!lj.contains(name) || !lj[name].is_number_integer()) {
          throw PreconditionError(std::string("likert.") + name + " must be an integer");
        }
        return lj[name].get<int>();
      };
      l.fluency = rating("fluency");
      l.specificity = rating("specificity");
      l.coherence = rating("coherence");
      l.legitimacy = rating("legitimacy");
      std::optional<bool> detected;
      if (body.contains("detected") && body["detected"].is_boolean()) {
        detected = body["detected"].get<bool>();
      }
      auto r = service.record_doc_review(str_field(body, "annotator"), str_field(body, "doc_id"), l,
                                         detected);
      reply(res, 201, json(r));
    }));

    http.Get("/api/reviews/summary", guarded([this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, to_json(service.review_summary()));
    }));

    http.Get("/api/export/gold", guarded([this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, json(service.consolidated()));
    }));

    if (options.static_dir) {
      if (!http.set_mount_point("/", options.static_dir->string())) {
        throw ConfigError("static directory not found: " + options.static_dir->string());
      }
    }
  }
};

AnnotationServer::AnnotationServer(AnnotationService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind() {
  if (impl_->options.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(impl_->options.host);
  } else if (impl_->http.bind_to_port(impl_->options.host, impl_->options.port)) {
    impl_->port = impl_->options.port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port <= 0) {
    throw ConfigError("cannot bind " + impl_->options.host + ":" +
                      std::to_string(impl_->options.port));
  }
  return impl_->port;
}

void AnnotationServer::serve() { impl_->http.listen_after_bind(); }

int AnnotationServer::start() {
  const int port = bind();
  impl_->worker = std::thread([this] { serve(); });
  impl_->http.wait_until_ready();
  return port;
}

void AnnotationServer::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace contraforge
