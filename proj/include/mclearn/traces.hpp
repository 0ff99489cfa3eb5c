#pragma once

#include <string>

#include "mclearn/alphabet.hpp"

namespace mclearn {

enum class TraceMode {
    Multi,  // one trace per line, any number of lines
    Single, // exactly one line: a single long execution
};

// Parses whitespace-separated symbol lines.  Lines starting with '#' are
// comments.  A non-comment line with no symbols is an error (every trace has
// at least one observation), as is an input with no traces at all.  When
// `fixed` is given, symbols outside that alphabet are an error and the result
// uses the fixed alphabet's ids.
TraceSet parse_traces(const std::string& text, TraceMode mode = TraceMode::Multi,
                      const Alphabet* fixed = nullptr);

TraceSet parse_traces_file(const std::string& path, TraceMode mode = TraceMode::Multi,
                           const Alphabet* fixed = nullptr);

// One line per trace, symbols separated by single spaces.
std::string serialize_traces(const TraceSet& ts);

void save_traces_file(const TraceSet& ts, const std::string& path);

} // namespace mclearn
