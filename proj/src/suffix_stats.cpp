#include "mclearn/suffix_stats.hpp"

#include <algorithm>

#include "mclearn/errors.hpp"

namespace mclearn {

SuffixStats::SuffixStats(const Trace& alpha, const Alphabet& alphabet, int max_depth)
    : alphabet_(alphabet), alpha_len_(static_cast<long long>(alpha.size())),
      max_depth_(max_depth) {
    if (alpha.empty()) throw UsageError("suffix statistics need a non-empty execution");
    if (max_depth < 1) throw UsageError("suffix statistics need depth >= 1");
    nodes_.push_back({});
    nodes_[0].count = alpha_len_; // root convention: #(<>) = |alpha|
    // For every window end j, walk backwards up to max_depth symbols and
    // count the window at each depth.
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        int cur = 0;
        for (int d = 0; d < max_depth_ && d <= static_cast<int>(j); ++d) {
            int sym = alpha[j - static_cast<std::size_t>(d)];
            int nxt = child(cur, sym);
            if (nxt < 0) {
                nxt = static_cast<int>(nodes_.size());
                nodes_.push_back({cur, sym, 0, {}});
                auto& kids = nodes_[static_cast<std::size_t>(cur)].kids;
                kids.emplace_back(sym, nxt);
                std::sort(kids.begin(), kids.end());
            }
            nodes_[static_cast<std::size_t>(nxt)].count += 1;
            cur = nxt;
        }
    }
}

int SuffixStats::locate(const Trace& ctx) const {
    int cur = 0;
    for (auto it = ctx.rbegin(); it != ctx.rend(); ++it) {
        cur = child(cur, *it);
        if (cur < 0) return -1;
    }
    return cur;
}

long long SuffixStats::count(const Trace& ctx) const {
    if (static_cast<int>(ctx.size()) > max_depth_) return 0;
    int node = locate(ctx);
    return node < 0 ? 0 : nodes_[static_cast<std::size_t>(node)].count;
}

double SuffixStats::fre(const Trace& ctx) const {
    long long denom = alpha_len_ - static_cast<long long>(ctx.size()) - 1;
    if (denom <= 0)
        throw UsageError("relative frequency undefined: context length " +
                         std::to_string(ctx.size()) + " too close to |alpha| = " +
                         std::to_string(alpha_len_));
    return static_cast<double>(count(ctx)) / static_cast<double>(denom);
}

long long SuffixStats::next_count(const Trace& ctx, int sym) const {
    Trace ext = ctx;
    ext.push_back(sym);
    return count(ext);
}

std::vector<double> SuffixStats::next_dist(const Trace& ctx) const {
    long long denom = count(ctx);
    if (denom <= 0) throw UsageError("next-symbol distribution of a context that never occurs");
    std::vector<double> out(static_cast<std::size_t>(alphabet_.size()), 0.0);
    int node = locate(ctx); // exists, count > 0
    for (const auto& [sym, kid] : nodes_[static_cast<std::size_t>(node)].kids) {
        (void)kid;
        out[static_cast<std::size_t>(sym)] =
            static_cast<double>(next_count(ctx, sym)) / static_cast<double>(denom);
    }
    return out;
}

std::vector<Trace> SuffixStats::contexts_up_to(int depth_limit) const {
    std::vector<Trace> out;
    int limit = std::min(depth_limit, max_depth_);
    // Depth-first enumeration, then canonical sort (length, then lex).
    std::vector<int> stack{0};
    std::vector<std::pair<int, Trace>> acc; // (node, context)
    acc.emplace_back(0, Trace{});
    std::size_t head = 0;
    while (head < acc.size()) {
        auto [node, ctx] = acc[head++];
        if (static_cast<int>(ctx.size()) >= limit) continue;
        for (const auto& [sym, kid] : nodes_[static_cast<std::size_t>(node)].kids) {
            // Child prepends an older symbol: context = <sym> . ctx.
            Trace ext;
            ext.reserve(ctx.size() + 1);
            ext.push_back(sym);
            ext.insert(ext.end(), ctx.begin(), ctx.end());
            acc.emplace_back(kid, std::move(ext));
        }
    }
    for (std::size_t i = 1; i < acc.size(); ++i) out.push_back(std::move(acc[i].second));
    std::sort(out.begin(), out.end(), [](const Trace& a, const Trace& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

} // namespace mclearn
