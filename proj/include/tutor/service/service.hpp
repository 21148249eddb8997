#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tutor/perf/performance_store.hpp"
#include "tutor/service/config.hpp"

namespace tutor::service {

struct HttpRequest {
  std::string method;
  /// Path without the query string, e.g. "/api/exercises/ex-1".
  std::string path;
  std::map<std::string, std::string> query;
  /// Raw Authorization header value.
  std::string authorization;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  /// JSON document, or empty for 204.
  std::string body;
};

/// Server-side clock in whole seconds since the epoch.
using Clock = std::function<perf::Timestamp()>;

perf::Timestamp system_clock_seconds();

/// The platform behind the HTTP API: exercises, submissions, quizzes, exams,
/// authoring and reports, persisted under config.data_dir. Thread-safe;
/// handle() may be called concurrently.
class TutorService {
 public:
  /// Loads (or seeds) the data directory. Throws ConfigError when stored or
  /// seed content cannot be loaded.
  explicit TutorService(ServiceConfig config, Clock clock = system_clock_seconds);
  ~TutorService();
  TutorService(const TutorService&) = delete;
  TutorService& operator=(const TutorService&) = delete;

  HttpResponse handle(const HttpRequest& request);

  const ServiceConfig& config() const;
  std::vector<perf::LearningEvent> events() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// HTTP/1.1 front end for a TutorService.
class HttpServer {
 public:
  explicit HttpServer(TutorService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Returns the bound port; port 0 picks a free one. Throws ConfigError.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called from another thread.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Binds and serves until the process is stopped. Throws ConfigError.
void serve_http(TutorService& service, const std::string& host, int port);

}  // namespace tutor::service
