#pragma once

// Concrete-syntax parser for the programming language.

#include <string>

#include "lsl/term.hpp"

namespace lsl {

// Parses a program in the ASCII grammar. Location literals (#lN) are
// rejected: they only arise at runtime.
// Throws std::runtime_error with line/column on malformed input.
TermPtr parse_program(const std::string& text);

// Same grammar, but location literals allowed (used by model files,
// whose value literals reuse the program grammar).
TermPtr parse_value_literal(const std::string& text);

}  // namespace lsl
