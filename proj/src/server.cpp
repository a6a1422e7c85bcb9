// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/server.hpp"

#include "httplib.h"
#include "nca/chat.hpp"

namespace nca {

using nlohmann::json;

namespace {

struct ApiError : std::runtime_error {
  int status;
  std::string code;
  ApiError(int s, std::string c, const std::string& msg)
      : std::runtime_error(msg), status(s), code(std::move(c)) {}
};

ApiError bad_request(const std::string& msg) { return {400, "bad_request", msg}; }
ApiError not_found(const std::string& msg) { return {404, "not_found", msg}; }
ApiError conflict(const std::string& msg) { return {409, "conflict", msg}; }

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& msg) {
  send_json(res, status, {{"code", code}, {"message", msg}});
}

const char* code_for(int status) {
  switch (status) {
    case 400: return "bad_request";
    case 404: return "not_found";
    case 409: return "conflict";
    default: return status < 500 ? "bad_request" : "internal";
  }
}

json parse_body(const httplib::Request& req, bool allow_empty) {
  const auto first = req.body.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) {
    if (allow_empty) return json::object();
    throw bad_request("request body must be a JSON object");
  }
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw bad_request("request body must be a JSON object");
  return j;
}

std::string require_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw bad_request(std::string("'") + key + "' must be a string");
  }
  return it->get<std::string>();
}

SessionConfig overridden(const SessionConfig& base, const json& overrides) {
  try {
    return apply_overrides(base, overrides);
  } catch (const std::invalid_argument& e) {
    throw bad_request(e.what());
  }
}

Feedback feedback_from(const json& body) {
  const bool has_select = body.contains("select");
  const bool has_text = body.contains("text");
  const bool has_skip = body.contains("skip");
  if (body.size() != 1 || has_select + has_text + has_skip != 1) {
    throw bad_request("feedback must be exactly one of {select}, {text} or {skip}");
  }
  if (has_select) {
    const auto& v = body["select"];
    if (!v.is_number_integer()) throw bad_request("'select' must be an integer");
    const auto k = v.get<std::int64_t>();
    if (k < 1) throw bad_request("selection " + std::to_string(k) + " out of range");
    return Feedback::select(static_cast<std::size_t>(k));
  }
  if (has_text) {
    const auto text = require_string(body, "text");
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw bad_request("'text' must not be empty");
    return Feedback::freeform(text);
  }
  if (body["skip"] != true) throw bad_request("'skip' must be true");
  return Feedback::skip();
}

}  // namespace

std::filesystem::path session_log_path(const std::filesystem::path& tmpl, const std::string& session_id) {
  auto name = tmpl.stem().string() + "-" + session_id + tmpl.extension().string();
  return tmpl.parent_path() / name;
}

ApiServer::ApiServer(ServerOptions options)
    : options_(std::move(options)), http_(std::make_unique<httplib::Server>()) {
  options_.defaults.validate();
  install_routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::set_base(Checkpoint ckpt) {
  auto base = std::make_shared<const Base>(
      Base{std::move(ckpt.params), std::make_shared<const Vocab>(std::move(ckpt.vocab))});
  std::unique_lock lock(base_mu_);
  base_ = std::move(base);
}

bool ApiServer::has_base() const {
  std::shared_lock lock(base_mu_);
  return base_ != nullptr;
}

int ApiServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = http_->bind_to_any_port(host);
  } else if (!http_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return bound;
}

bool ApiServer::listen(const std::string& host, int port) { return http_->listen(host, port); }

void ApiServer::stop() {
  if (http_->is_running()) http_->stop();
  if (thread_.joinable()) thread_.join();
}

std::shared_ptr<ApiServer::Slot> ApiServer::find(const std::string& id) const {
  std::lock_guard lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw not_found("unknown session '" + id + "'");
  return it->second;
}

void ApiServer::install_routes() {
  using httplib::Request;
  using httplib::Response;

  // Wraps a handler so ApiError and library exceptions become the error shape.
  auto wrap = [](auto fn) {
    return [fn](const Request& req, Response& res) {
      try {
        fn(req, res);
      } catch (const ApiError& e) {
        send_error(res, e.status, e.code, e.what());
      } catch (const NoPendingTurnError& e) {
        send_error(res, 409, "conflict", e.what());
      } catch (const std::invalid_argument& e) {
        send_error(res, 400, "bad_request", e.what());
      }
    };
  };

  http_->Post("/api/session", wrap([this](const Request& req, Response& res) {
    const auto overrides = parse_body(req, true);
    std::shared_ptr<const Base> base;
    {
      std::shared_lock lock(base_mu_);
      base = base_;
    }
    if (!base) throw conflict("no model loaded");
    const auto cfg = overridden(options_.defaults, overrides);

    auto slot = std::make_shared<Slot>();
    std::string id;
    {
      std::lock_guard lock(sessions_mu_);
      id = "s" + std::to_string(next_id_++);
    }
    slot->session = std::make_unique<Session>(id, base->params, base->vocab, cfg, options_.clock);
    if (options_.log_template) slot->session->set_log_path(session_log_path(*options_.log_template, id));
    {
      std::lock_guard lock(sessions_mu_);
      sessions_.emplace(id, slot);
    }
    send_json(res, 200, {{"sessionId", id}, {"config", to_json(cfg)}});
  }));

  http_->Post(R"(/api/session/([^/]+)/message)", wrap([this](const Request& req, Response& res) {
    auto slot = find(req.matches[1]);
    const auto body = parse_body(req, false);
    const auto text = require_string(body, "text");
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw bad_request("'text' must not be empty");

    std::lock_guard lock(slot->mu);
    const auto& turn = slot->session->user_message(text);
    json cands = json::array();
    for (const auto& c : turn.candidates) {
      cands.push_back({{"index", c.index}, {"text", c.text}, {"logScore", c.log_score}});
    }
    send_json(res, 200, {{"candidates", std::move(cands)}, {"displayOrder", turn.display_order}});
  }));

  http_->Post(R"(/api/session/([^/]+)/feedback)", wrap([this](const Request& req, Response& res) {
    auto slot = find(req.matches[1]);
    const auto feedback = feedback_from(parse_body(req, false));

    std::lock_guard lock(slot->mu);
    const auto result = slot->session->apply_feedback(feedback);
    json out = {{"chosenResponse", result.chosen_response}, {"updated", result.updated}};
    if (result.loss_after) out["loss"] = *result.loss_after;
    send_json(res, 200, out);
  }));

  http_->Get(R"(/api/session/([^/]+)/transcript)", wrap([this](const Request& req, Response& res) {
    auto slot = find(req.matches[1]);
    const auto format = req.has_param("format") ? req.get_param_value("format") : std::string("json");
    if (format != "json" && format != "jsonl") throw bad_request("format must be json or jsonl");

    std::lock_guard lock(slot->mu);
    if (format == "jsonl") {
      res.status = 200;
      res.set_content(slot->session->transcript_jsonl(), "application/x-ndjson");
      return;
    }
    json out = json::array();
    for (const auto& r : slot->session->transcript()) out.push_back(to_json(r));
    send_json(res, 200, out);
  }));

  http_->Patch(R"(/api/session/([^/]+)/config)", wrap([this](const Request& req, Response& res) {
    auto slot = find(req.matches[1]);
    const auto overrides = parse_body(req, false);

    std::lock_guard lock(slot->mu);
    const auto cfg = overridden(slot->session->config(), overrides);
    slot->session->set_config(cfg);
    send_json(res, 200, to_json(cfg));
  }));

  http_->Post("/api/checkpoint", wrap([this](const Request& req, Response& res) {
    const auto body = parse_body(req, false);
    const auto action = require_string(body, "action");
    const auto path = require_string(body, "path");
    if (path.empty()) throw bad_request("'path' must not be empty");

    if (action == "load") {
      if (body.contains("sessionId")) throw bad_request("load replaces the base model; omit sessionId");
      try {
        set_base(load_checkpoint(path));
      } catch (const CheckpointError& e) {
        throw bad_request(e.what());
      }
    } else if (action == "save") {
      Checkpoint ckpt = [&] {
        if (body.contains("sessionId")) {
          auto slot = find(require_string(body, "sessionId"));
          std::lock_guard lock(slot->mu);
          return snapshot(*slot->session);
        }
        std::shared_lock lock(base_mu_);
        if (!base_) throw conflict("no model loaded");
        return Checkpoint{*base_->vocab, base_->params, std::nullopt, Provenance{"base", 0, {}, 0}};
      }();
      try {
        save_checkpoint(ckpt, path);
      } catch (const CheckpointError& e) {
        throw bad_request(e.what());
      }
    } else {
      throw bad_request("action must be save or load");
    }
    send_json(res, 200, {{"status", "ok"}, {"action", action}, {"path", path}});
  }));

  http_->set_error_handler([](const Request& req, Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    const std::string msg = res.status == 404 ? "no route for " + req.method + " " + req.path
                                              : "request failed";
    send_error(res, res.status, code_for(res.status), msg);
    return httplib::Server::HandlerResponse::Handled;
  });

  http_->set_exception_handler([](const Request&, Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    send_error(res, 500, "internal", msg);
  });
}

}  // namespace nca
