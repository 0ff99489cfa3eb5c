#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "mclearn/errors.hpp"

namespace mclearn {

// Symbol table mapping observation labels to dense ids.  Ids are assigned in
// first-appearance order, so a trace file always parses to the same alphabet.
class Alphabet {
public:
    Alphabet() = default;

    int intern(const std::string& sym) {
        auto it = index_.find(sym);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(symbols_.size());
        symbols_.push_back(sym);
        index_.emplace(sym, id);
        return id;
    }

    // Lookup without insertion; -1 when unknown.
    int find(const std::string& sym) const {
        auto it = index_.find(sym);
        return it == index_.end() ? -1 : it->second;
    }

    const std::string& name(int id) const { return symbols_.at(static_cast<std::size_t>(id)); }
    int size() const { return static_cast<int>(symbols_.size()); }
    const std::vector<std::string>& names() const { return symbols_; }

private:
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, int> index_;
};

using Trace = std::vector<int>;

// A multiset of traces over a shared alphabet (multi-execution input), or a
// single long trace when |traces| == 1 (single-execution input).
struct TraceSet {
    Alphabet alphabet;
    std::vector<Trace> traces;

    // Total letter count across all traces; the n of the BIC penalty term.
    long long total_letters() const {
        long long n = 0;
        for (const auto& t : traces) n += static_cast<long long>(t.size());
        return n;
    }
};

} // namespace mclearn
