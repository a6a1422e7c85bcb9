// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>

#include "nca/checkpoint.hpp"
#include "nca/session.hpp"

namespace httplib {
class Server;
}

namespace nca {

struct ServerOptions {
  SessionConfig defaults;  // starting config of every new session
  /// Per-session JSONL log. "logs/chat.jsonl" becomes "logs/chat-s1.jsonl"
  /// for session s1.
  std::optional<std::filesystem::path> log_template;
  Session::Clock clock = utc_timestamp;
};

std::filesystem::path session_log_path(const std::filesystem::path& tmpl, const std::string& session_id);

/// JSON API over HTTP:
///
///   POST  /api/session                  {overrides?}         -> {sessionId, config}
///   POST  /api/session/{id}/message     {text}               -> {candidates, displayOrder}
///   POST  /api/session/{id}/feedback    {select}|{text}|{skip} -> {chosenResponse, updated, loss?}
///   GET   /api/session/{id}/transcript  [?format=jsonl]      -> [record...]
///   PATCH /api/session/{id}/config      {overrides}          -> config
///   POST  /api/checkpoint               {action, path, sessionId?} -> {status, action, path}
///
/// Failures answer {code, message} with code one of bad_request, not_found,
/// conflict, internal.
class ApiServer {
 public:
  explicit ApiServer(ServerOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Replaces the model new sessions are cloned from. Live sessions keep
  /// their own copy.
  void set_base(Checkpoint ckpt);
  bool has_base() const;

  /// Binds (port 0 picks a free one) and serves on a background thread.
  /// Returns the bound port.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

 private:
  struct Base {
    Seq2SeqParams params;
    std::shared_ptr<const Vocab> vocab;
  };
  struct Slot {
    std::mutex mu;
    std::unique_ptr<Session> session;
  };

  void install_routes();
  std::shared_ptr<Slot> find(const std::string& id) const;

  ServerOptions options_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;

  mutable std::shared_mutex base_mu_;
  std::shared_ptr<const Base> base_;

  mutable std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace nca
