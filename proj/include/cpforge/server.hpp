#pragma once

// HTTP service that runs annotation sessions for a human (or scripted)
// annotator. Bodies are JSON objects.
//
//   POST /sessions                {dataset, budget, seed[, clusters, holdout_frac]} -> 201 {session_id}
//   GET  /sessions/{id}           status snapshot, including the accuracy history
//   GET  /sessions/{id}/query     {segment_id, grid, features, queries_made, budget, holdout_accuracy}
//   POST /sessions/{id}/labels    {segment_id, label} -> {segment_id, label, queries_made, budget,
//                                                         holdout_accuracy, labeled}
//   POST /sessions/{id}/finish    persists model + labeled set -> {model, labeled, queries_made}
//   GET  /healthz                 "ok"
//   /ui/*                         static files from ui_dir, when configured
//
// Errors are {"error": <name>, "message": ...} with 404 UnknownId (also for
// unknown sessions), 409 AlreadyLabeled, 410 BudgetExhausted, 422 PoolEmpty,
// 400 for malformed requests and 500 for I/O faults.

#include <memory>
#include <string>
#include <thread>

#include "cpforge/error.hpp"
#include "cpforge/quality_model.hpp"

namespace cpforge {

struct ServiceOptions {
  std::string session_dir = ".";   // finished sessions are written here
  std::string default_clusters;    // used when a create request names none
  std::string ui_dir;              // mounted at /ui when non-empty
  TrainingHyper hyper;
  double holdout_frac = 0.2;
};

int http_status(ErrorCode code);

class AnnotationService {
 public:
  explicit AnnotationService(ServiceOptions options);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // Binds to host:port; port 0 picks a free port. Returns the bound port.
  // Throws Error{IoError} if the port cannot be bound.
  int bind(const std::string& host, int port);

  // Serves until stop(). Requires a successful bind().
  void run();

  // run() on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace cpforge
