// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>

#include "nca/checkpoint.hpp"
#include "nca/session.hpp"

namespace nca {

/// Current params, vocabulary and optimizer state of a live session.
Checkpoint snapshot(const Session& session);

/// Interactive loop over a line stream.
///
///   human: <message>          candidates are printed as "  [i] text"
///   feedback: <n | text | >   number selects, text replaces, blank skips
///
/// Lines starting with '/' at the human prompt are commands: "/lr <rate>",
/// "/save <path>" and "/quit". Returns the number of completed turns when
/// the input ends or /quit is read.
std::size_t run_chat(Session& session, std::istream& in, std::ostream& out);

}  // namespace nca
