#pragma once

// Preprocess-once / clone-many HTTP service. CloneService holds the session
// and target caches; install_routes binds it to an httplib server.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <list>
#include <memory>
#include <mutex>
#include <semaphore>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>

#include "panoclone/interface.hpp"
#include "panoclone/session_io.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro.
#include <httplib.h>

namespace panoclone {

struct ServiceConfig {
  std::size_t session_capacity = 16;
  std::size_t target_capacity = 16;
  /// Largest accepted image width, in pixels.
  int max_dimension = 8192;
  /// Write-through spill directory; empty disables spilling.
  std::string spill_dir;
  /// Concurrent renders; zero selects hardware concurrency.
  unsigned render_workers = 0;
};

/// A failed request: HTTP status plus JSON body.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, json body) : std::runtime_error(body.dump()), status_(status), body_(std::move(body)) {}
  int status() const { return status_; }
  const json& body() const { return body_; }

 private:
  int status_;
  json body_;
};

inline int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::FormatError:
      return 400;
    case ErrorCode::NotFound:
      return 404;
    default:
      return 422;
  }
}

inline ServiceError service_error(const Error& e) { return ServiceError(http_status_for(e.code()), error_json(e)); }

namespace detail {

inline std::string content_id(std::initializer_list<std::string_view> parts) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::string_view p : parts) {
    for (unsigned char c : p) h = (h ^ c) * 1099511628211ull;
    h = (h ^ 0xff) * 1099511628211ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = hex[h & 15];
  return out;
}

/// Small thread-safe LRU map.
template <class V>
class LruCache {
 public:
  explicit LruCache(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

  std::shared_ptr<const V> get(const std::string& key) {
    std::lock_guard lock(m_);
    const auto it = map_.find(key);
    if (it == map_.end()) return nullptr;
    order_.splice(order_.begin(), order_, it->second.second);
    return it->second.first;
  }

  void put(const std::string& key, std::shared_ptr<const V> value) {
    std::lock_guard lock(m_);
    if (const auto it = map_.find(key); it != map_.end()) {
      it->second.first = std::move(value);
      order_.splice(order_.begin(), order_, it->second.second);
      return;
    }
    order_.push_front(key);
    map_.emplace(key, std::pair{std::move(value), order_.begin()});
    while (map_.size() > capacity_) {
      map_.erase(order_.back());
      order_.pop_back();
    }
  }

  std::size_t size() const {
    std::lock_guard lock(m_);
    return map_.size();
  }

 private:
  std::size_t capacity_;
  mutable std::mutex m_;
  std::list<std::string> order_;
  std::unordered_map<std::string, std::pair<std::shared_ptr<const V>, std::list<std::string>::iterator>> map_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spill(const std::filesystem::path& p, const std::string& bytes) {
  const std::filesystem::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw Error(ErrorCode::FormatError, "spill write failed for " + p.string());
  }
  std::filesystem::rename(tmp, p);
}

}  // namespace detail

class CloneService {
 public:
  struct Entry {
    CloneSession session;
    json inputs;  // boundary polyline and options, for split overrides
    json summary;
  };

  struct SessionResult {
    std::string id;
    bool cached = false;
    json body;
  };

  struct CloneResult {
    std::vector<std::uint8_t> png;
    double membrane_ms = 0.0, raster_ms = 0.0;
    bool preprocess_cached = true;
    std::string session_id;
  };

  explicit CloneService(ServiceConfig cfg = {})
      : cfg_(std::move(cfg)),
        sessions_(cfg_.session_capacity),
        targets_(cfg_.target_capacity),
        renders_(std::ptrdiff_t(cfg_.render_workers ? cfg_.render_workers
                                                    : std::max(1u, std::thread::hardware_concurrency()))) {
    if (!cfg_.spill_dir.empty()) std::filesystem::create_directories(cfg_.spill_dir);
  }

  const ServiceConfig& config() const { return cfg_; }
  std::size_t preprocess_count() const { return preprocess_count_.load(); }
  std::size_t cached_sessions() const { return sessions_.size(); }

  SessionResult create_session(const std::string& image, const std::string& boundary_text,
                               const std::string& options_text = "", const std::string& matte = "") {
    const json boundary = parse_or_400(boundary_text, "boundary");
    const json options = options_text.empty() ? json::object() : parse_or_400(options_text, "options");
    const std::string id = detail::content_id({image, boundary.dump(), options.dump(), matte});
    bool cached = true;
    auto entry = obtain(id, cached, [&] {
      Panorama source = decode_image_checked(image);
      json inputs{{"boundary", boundary}, {"options", options}};
      auto e = build(std::move(source), inputs, matte);
      return e;
    });
    return {id, cached, response_body(id, *entry, cached)};
  }

  std::string add_target(const std::string& image) {
    const std::string id = detail::content_id({"target", image});
    if (targets_.get(id)) return id;
    auto pano = std::make_shared<const Panorama>(decode_image_checked(image));
    targets_.put(id, pano);
    if (!cfg_.spill_dir.empty()) detail::spill(spill_path(id, ".target"), image);
    return id;
  }

  std::shared_ptr<const Panorama> target(const std::string& id) {
    if (auto t = targets_.get(id)) return t;
    if (!cfg_.spill_dir.empty() && std::filesystem::exists(spill_path(id, ".target"))) {
      auto pano = std::make_shared<const Panorama>(decode_image_checked(detail::slurp(spill_path(id, ".target"))));
      targets_.put(id, pano);
      return pano;
    }
    throw service_error(Error(ErrorCode::NotFound, "unknown target id '" + id + "'"));
  }

  std::shared_ptr<const Entry> session(const std::string& id) {
    if (auto e = sessions_.get(id)) return e;
    if (!cfg_.spill_dir.empty() && std::filesystem::exists(spill_path(id, ".session"))) {
      auto e = std::make_shared<Entry>();
      try {
        e->session = deserialize_session(detail::slurp(spill_path(id, ".session")));
        const json meta = json::parse(detail::slurp(spill_path(id, ".json")));
        e->inputs = meta.at("inputs");
        e->summary = meta.at("summary");
      } catch (const Error& err) {
        throw service_error(err);
      } catch (const std::exception& err) {
        throw service_error(Error(ErrorCode::FormatError, std::string("spilled session unreadable: ") + err.what()));
      }
      sessions_.put(id, e);
      return e;
    }
    throw service_error(Error(ErrorCode::NotFound, "unknown session id '" + id + "'"));
  }

  json describe(const std::string& id) {
    const auto e = session(id);
    return response_body(id, *e, true);
  }

  CloneResult clone(const std::string& id, const std::string& request_text) {
    const json req = parse_or_400(request_text, "clone request");
    if (!req.is_object()) throw service_error(Error(ErrorCode::InvalidArgument, "clone request must be an object"));
    CloneResult result;
    result.session_id = id;
    std::shared_ptr<const Entry> entry = session(id);
    try {
      if (req.contains("split") && !req["split"].is_null()) {
        const SplitMode mode = parse_split_mode(req["split"].get<std::string>());
        json options = entry->inputs.value("options", json::object());
        if (parse_split_mode(options.value("split", std::string("auto"))) != mode) {
          options["split"] = to_string(mode);
          const std::string derived = detail::content_id({id, options.dump()});
          const std::shared_ptr<const Entry> parent = entry;
          entry = obtain(derived, result.preprocess_cached, [&] {
            json inputs{{"boundary", parent->inputs.at("boundary")}, {"options", options}};
            auto e = std::make_shared<Entry>();
            e->inputs = inputs;
            e->session = preprocess(parent->session.source, parse_boundary(inputs["boundary"]),
                                    preprocess_options(options));
            e->session.matte = parent->session.matte;
            e->summary = summarize(e->session);
            return std::shared_ptr<const Entry>(e);
          });
          result.session_id = derived;
        }
      }
      if (!req.contains("target_id") || !req["target_id"].is_string()) {
        throw Error(ErrorCode::InvalidArgument, "clone request needs a string 'target_id'");
      }
      const auto tgt = target(req["target_id"].get<std::string>());
      const SphericalCoord anchor = req.contains("anchor")
                                        ? parse_anchor(req["anchor"], tgt->width(), tgt->height())
                                        : datum_anchor(entry->session);
      RenderOptions opt;
      if (req.contains("supersampling")) {
        opt.supersampling = int(detail::number(req, "supersampling"));
        if (!valid_supersampling(opt.supersampling)) {
          throw Error(ErrorCode::InvalidArgument, "supersampling must be one of 1, 2, 4, 8, 16");
        }
      }
      if (req.contains("matte")) {
        if (!req["matte"].is_boolean()) throw Error(ErrorCode::InvalidArgument, "matte must be a boolean");
        opt.use_matte = req["matte"].get<bool>();
      }
      if (req.contains("rect")) opt.rect = parse_rect(req["rect"]);

      CloneTiming timing;
      renders_.acquire();
      try {
        result.png = render_png(entry->session, *tgt, anchor, opt, &timing);
      } catch (...) {
        renders_.release();
        throw;
      }
      renders_.release();
      result.membrane_ms = timing.membrane_ms;
      result.raster_ms = timing.raster_ms;
    } catch (const Error& e) {
      throw service_error(e);
    }
    return result;
  }

  std::string diagnostics(const std::string& id) {
    const auto e = session(id);
    std::ostringstream os;
    write_diagnostics_csv(e->session, os);
    return os.str();
  }

 private:
  template <class Make>
  std::shared_ptr<const Entry> obtain(const std::string& id, bool& cached, Make&& make) {
    cached = true;
    try {
      return session(id);
    } catch (const ServiceError& e) {
      if (e.status() != 404) throw;
    }
    std::shared_future<std::shared_ptr<const Entry>> fut;
    std::promise<std::shared_ptr<const Entry>> promise;
    bool owner = false;
    {
      std::lock_guard lock(inflight_m_);
      if (const auto it = inflight_.find(id); it != inflight_.end()) {
        fut = it->second;
      } else {
        fut = promise.get_future().share();
        inflight_.emplace(id, fut);
        owner = true;
      }
    }
    if (!owner) return fut.get();
    cached = false;
    try {
      std::shared_ptr<const Entry> e;
      try {
        e = make();
      } catch (const Error& err) {
        throw service_error(err);
      }
      ++preprocess_count_;
      sessions_.put(id, e);
      if (!cfg_.spill_dir.empty()) {
        detail::spill(spill_path(id, ".session"), serialize_session(e->session));
        detail::spill(spill_path(id, ".json"), json{{"inputs", e->inputs}, {"summary", e->summary}}.dump());
      }
      promise.set_value(e);
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(inflight_m_);
      inflight_.erase(id);
      throw;
    }
    std::lock_guard lock(inflight_m_);
    inflight_.erase(id);
    return fut.get();
  }

  std::shared_ptr<const Entry> build(Panorama source, const json& inputs, const std::string& matte) {
    auto e = std::make_shared<Entry>();
    e->inputs = inputs;
    e->session = preprocess(source, parse_boundary(inputs.at("boundary")), preprocess_options(inputs.at("options")));
    if (!matte.empty()) {
      const std::vector<std::uint8_t> bytes(matte.begin(), matte.end());
      attach_matte(e->session, decode_matte(bytes, source.width(), source.height()));
    }
    e->summary = summarize(e->session);
    return e;
  }

  static json summarize(const CloneSession& s) {
    return {{"mesh_stats", mesh_stats_json(s)},
            {"split_plan", split_plan_json(s)},
            {"datum", {{"phi", unit_to_sph(s.datum).phi}, {"theta", unit_to_sph(s.datum).theta}}},
            {"source", {{"width", s.source.width()}, {"height", s.source.height()}}},
            {"matte", s.has_matte()}};
  }

  static json response_body(const std::string& id, const Entry& e, bool cached) {
    json body = e.summary;
    body["session_id"] = id;
    body["cached"] = cached;
    return body;
  }

  static json parse_or_400(const std::string& text, const char* what) {
    try {
      return parse_json(text, what);
    } catch (const Error& e) {
      throw service_error(e);
    }
  }

  Panorama decode_image_checked(const std::string& bytes) {
    try {
      const RawImage raw = decode_image(std::vector<std::uint8_t>(bytes.begin(), bytes.end()));
      if (raw.width > cfg_.max_dimension) {
        throw ServiceError(413, {{"error", "ImageTooLarge"},
                                 {"message", "image width " + std::to_string(raw.width) + " exceeds the limit of " +
                                                 std::to_string(cfg_.max_dimension)}});
      }
      return to_panorama(raw);
    } catch (const Error& e) {
      throw service_error(e);
    }
  }

  std::filesystem::path spill_path(const std::string& id, const char* ext) const {
    return std::filesystem::path(cfg_.spill_dir) / (id + ext);
  }

  ServiceConfig cfg_;
  detail::LruCache<Entry> sessions_;
  detail::LruCache<Panorama> targets_;
  std::counting_semaphore<1024> renders_;
  std::atomic<std::size_t> preprocess_count_{0};
  std::mutex inflight_m_;
  std::unordered_map<std::string, std::shared_future<std::shared_ptr<const Entry>>> inflight_;
};

namespace detail {

inline void send_error(httplib::Response& res, const ServiceError& e) {
  res.status = e.status();
  res.set_content(e.body().dump(), "application/json");
}

template <class Handler>
auto guarded(Handler h) {
  return [h](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e);
    } catch (const Error& e) {
      send_error(res, service_error(e));
    } catch (const std::exception& e) {
      send_error(res, ServiceError(500, {{"error", "Internal"}, {"message", e.what()}}));
    }
  };
}

inline std::string field(const httplib::Request& req, const char* name, bool required) {
  if (req.has_file(name)) return req.get_file_value(name).content;
  if (req.has_param(name)) return req.get_param_value(name);
  if (required) {
    throw ServiceError(400, {{"error", "InvalidArgument"}, {"message", std::string("missing form field '") + name + "'"}});
  }
  return {};
}

inline thread_local std::chrono::steady_clock::time_point request_start;

}  // namespace detail

/// Binds the service endpoints to `server`, with one JSON log line per
/// request on `log`.
inline void install_routes(httplib::Server& server, CloneService& svc, std::ostream* log = &std::cerr) {
  using detail::guarded;

  server.set_pre_routing_handler([](const httplib::Request&, httplib::Response&) {
    detail::request_start = std::chrono::steady_clock::now();
    return httplib::Server::HandlerResponse::Unhandled;
  });
  if (log) {
    auto mutex = std::make_shared<std::mutex>();
    server.set_logger([log, mutex](const httplib::Request& req, const httplib::Response& res) {
      const double ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - detail::request_start).count();
      json line{{"method", req.method}, {"path", req.path}, {"status", res.status}, {"ms", ms}};
      if (res.has_header("membrane_ms")) line["membrane_ms"] = std::stod(res.get_header_value("membrane_ms"));
      if (res.has_header("raster_ms")) line["raster_ms"] = std::stod(res.get_header_value("raster_ms"));
      std::lock_guard lock(*mutex);
      *log << line.dump() << '\n' << std::flush;
    });
  }

  server.Get("/health", [&svc](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"status", "ok"}, {"preprocess_count", svc.preprocess_count()},
                         {"cached_sessions", svc.cached_sessions()}}.dump(),
                    "application/json");
  });

  server.Post("/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data()) {
      throw ServiceError(400, {{"error", "InvalidArgument"}, {"message", "POST /sessions expects multipart/form-data"}});
    }
    const auto r = svc.create_session(detail::field(req, "source", true), detail::field(req, "boundary", true),
                                      detail::field(req, "options", false), detail::field(req, "matte", false));
    res.status = r.cached ? 200 : 201;
    res.set_content(r.body.dump(), "application/json");
  }));

  server.Post("/targets", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string bytes = req.is_multipart_form_data() ? detail::field(req, "target", true) : req.body;
    const std::string id = svc.add_target(bytes);
    const auto t = svc.target(id);
    res.status = 201;
    res.set_content(json{{"target_id", id}, {"width", t->width()}, {"height", t->height()}}.dump(), "application/json");
  }));

  server.Get(R"(/sessions/([0-9a-f]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    res.set_content(svc.describe(req.matches[1]).dump(), "application/json");
  }));

  server.Post(R"(/sessions/([0-9a-f]+)/clone)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const auto r = svc.clone(req.matches[1], req.body);
    res.set_header("preprocess-cached", r.preprocess_cached ? "true" : "false");
    res.set_header("membrane_ms", std::to_string(r.membrane_ms));
    res.set_header("raster_ms", std::to_string(r.raster_ms));
    res.set_header("session-id", r.session_id);
    res.set_content(std::string(r.png.begin(), r.png.end()), "image/png");
  }));

  server.Get(R"(/sessions/([0-9a-f]+)/diagnostics)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    res.set_content(svc.diagnostics(req.matches[1]), "text/csv");
  }));

  // Ids that are not hex never match the routes above.
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      res.set_content(json{{"error", "NotFound"}, {"code", int(ErrorCode::NotFound)}, {"message", "no such resource"}}
                          .dump(),
                      "application/json");
    } else if (res.status == 413 && res.body.empty()) {
      res.set_content(json{{"error", "PayloadTooLarge"}, {"message", "request body exceeds the upload limit"}}.dump(),
                      "application/json");
    }
  });
}

}  // namespace panoclone
