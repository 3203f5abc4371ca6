#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "panoclone/service.hpp"

int main(int argc, char** argv) {
  panoclone::ServiceConfig cfg;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_upload_mb = 256;
  unsigned threads = std::max(2u, std::thread::hardware_concurrency());

  CLI::App app{"HTTP service for preprocess-once, clone-many panorama cloning."};
  app.add_option("--host", host, "Listen address")->envname("PANOCLONE_HOST");
  app.add_option("--port", port, "Listen port")->envname("PANOCLONE_PORT");
  app.add_option("--cache-size", cfg.session_capacity, "Sessions kept in memory")->envname("PANOCLONE_CACHE_SIZE");
  app.add_option("--target-cache-size", cfg.target_capacity, "Target panoramas kept in memory")
      ->envname("PANOCLONE_TARGET_CACHE_SIZE");
  app.add_option("--max-dimension", cfg.max_dimension, "Largest accepted image width in pixels")
      ->envname("PANOCLONE_MAX_DIMENSION");
  app.add_option("--max-upload-mb", max_upload_mb, "Largest accepted request body")->envname("PANOCLONE_MAX_UPLOAD_MB");
  app.add_option("--spill-dir", cfg.spill_dir, "Directory for spilled sessions and targets")
      ->envname("PANOCLONE_SPILL_DIR");
  app.add_option("--render-workers", cfg.render_workers, "Concurrent renders (0 = CPU cores)")
      ->envname("PANOCLONE_RENDER_WORKERS");
  app.add_option("--threads", threads, "HTTP worker threads")->envname("PANOCLONE_THREADS");
  CLI11_PARSE(app, argc, argv);

  panoclone::CloneService svc(cfg);
  httplib::Server server;
  server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  server.set_payload_max_length(max_upload_mb * 1024 * 1024);
  panoclone::install_routes(server, svc);
  std::cerr << panoclone::json{{"event", "listening"}, {"host", host}, {"port", port}}.dump() << std::endl;
  if (!server.listen(host, port)) {
    std::cerr << panoclone::json{{"event", "bind_failed"}, {"host", host}, {"port", port}}.dump() << std::endl;
    return 1;
  }
  return 0;
}
