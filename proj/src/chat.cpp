// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/chat.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace nca {

namespace {

std::string trim_copy(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Returns false when the loop should end.
bool run_command(Session& session, const std::string& line, std::ostream& out) {
  const auto space = line.find(' ');
  const std::string cmd = line.substr(0, space);
  const std::string arg = space == std::string::npos ? "" : trim_copy(line.substr(space + 1));
  if (cmd == "/quit") return false;
  try {
    if (cmd == "/lr") {
      auto cfg = session.config();
      cfg.lr = std::stod(arg);
      session.set_config(cfg);
      out << "lr set to " << cfg.lr << "\n";
    } else if (cmd == "/save") {
      if (arg.empty()) throw std::invalid_argument("usage: /save <path>");
      save_checkpoint(snapshot(session), arg);
      out << "saved " << arg << "\n";
    } else {
      out << "unknown command " << cmd << " (try /lr, /save, /quit)\n";
    }
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
  }
  return true;
}

}  // namespace

Checkpoint snapshot(const Session& session) {
  return Checkpoint{session.vocab(), session.params(), session.adam(),
                    Provenance{"online", session.turns(), {}, session.config().seed}};
}

std::size_t run_chat(Session& session, std::istream& in, std::ostream& out) {
  std::size_t done = 0;
  std::string line;
  while (true) {
    out << "human: " << std::flush;
    if (!std::getline(in, line)) break;
    const auto msg = trim_copy(line);
    if (msg.empty()) continue;
    if (msg.front() == '/') {
      if (!run_command(session, msg, out)) break;
      continue;
    }

    const DisplayedTurn* turn = nullptr;
    try {
      turn = &session.user_message(msg);
    } catch (const std::invalid_argument& e) {
      out << "error: " << e.what() << "\n";
      continue;
    }
    out << "bot:\n";
    for (const auto& c : turn->candidates) out << "  [" << c.index << "] " << c.text << "\n";

    while (session.has_pending()) {
      out << "feedback: " << std::flush;
      if (!std::getline(in, line)) return done;
      try {
        const auto result = session.apply_feedback(Feedback::parse(line));
        out << "bot: " << result.chosen_response << "\n";
        ++done;
      } catch (const std::invalid_argument& e) {
        out << "error: " << e.what() << "\n";
      }
    }
  }
  return done;
}

}  // namespace nca
