#include "mclearn/traces.hpp"

#include <fstream>
#include <sstream>

#include "mclearn/errors.hpp"

namespace mclearn {

TraceSet parse_traces(const std::string& text, TraceMode mode, const Alphabet* fixed) {
    TraceSet ts;
    if (fixed) ts.alphabet = *fixed;

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line[first] == '#') continue;

        std::istringstream ls(line);
        Trace t;
        std::string sym;
        while (ls >> sym) {
            int id;
            if (fixed) {
                id = ts.alphabet.find(sym);
                if (id < 0)
                    throw UsageError("line " + std::to_string(lineno) + ": symbol '" + sym +
                                     "' not in the fixed alphabet");
            } else {
                id = ts.alphabet.intern(sym);
            }
            t.push_back(id);
        }
        if (t.empty())
            throw UsageError("line " + std::to_string(lineno) +
                             ": empty trace (every trace needs at least one symbol)");
        ts.traces.push_back(std::move(t));
    }

    if (ts.traces.empty()) throw UsageError("no traces in input");
    if (mode == TraceMode::Single && ts.traces.size() != 1)
        throw UsageError("single-execution input must contain exactly one trace, got " +
                         std::to_string(ts.traces.size()));
    return ts;
}

TraceSet parse_traces_file(const std::string& path, TraceMode mode, const Alphabet* fixed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_traces(buf.str(), mode, fixed);
}

std::string serialize_traces(const TraceSet& ts) {
    std::ostringstream os;
    for (const auto& t : ts.traces) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i) os << ' ';
            os << ts.alphabet.name(t[i]);
        }
        os << '\n';
    }
    return os.str();
}

void save_traces_file(const TraceSet& ts, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out << serialize_traces(ts);
    if (!out) throw UsageError("write failed for " + path);
}

} // namespace mclearn
