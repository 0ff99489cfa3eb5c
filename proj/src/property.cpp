#include "mclearn/property.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "mclearn/errors.hpp"

namespace mclearn {

namespace {

struct Lexer {
    const std::string& s;
    std::size_t pos = 0;

    explicit Lexer(const std::string& str) : s(str) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool eof() {
        skip_ws();
        return pos >= s.size();
    }

    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    bool consume(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    bool consume_word(const std::string& w) {
        skip_ws();
        if (s.compare(pos, w.size(), w) == 0) {
            pos += w.size();
            return true;
        }
        return false;
    }

    std::string quoted() {
        skip_ws();
        if (pos >= s.size() || s[pos] != '"')
            throw UsageError("expected quoted symbol in property");
        std::size_t end = s.find('"', pos + 1);
        if (end == std::string::npos) throw UsageError("unterminated quote in property");
        std::string out = s.substr(pos + 1, end - pos - 1);
        pos = end + 1;
        if (out.empty()) throw UsageError("empty symbol in property");
        return out;
    }

    std::string bare_word() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) &&
               s[pos] != ',' && s[pos] != '}' && s[pos] != ']')
            ++pos;
        if (pos == start) throw UsageError("expected symbol name in property");
        return s.substr(start, pos - start);
    }

    long long integer() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) throw UsageError("expected step bound in property");
        return std::stoll(s.substr(start, pos - start));
    }
};

Predicate parse_predicate(Lexer& lx) {
    Predicate p;
    if (lx.peek() == '"') {
        p.symbols.push_back(lx.quoted());
        return p;
    }
    if (lx.consume('{')) {
        for (;;) {
            p.symbols.push_back(lx.bare_word());
            if (lx.consume(',')) continue;
            if (lx.consume('}')) break;
            throw UsageError("expected ',' or '}' in symbol set");
        }
        if (p.symbols.empty()) throw UsageError("empty symbol set in property");
        return p;
    }
    throw UsageError("expected predicate (quoted symbol or {set}) in property");
}

// Optional <=k suffix right after F/G/U.
bool parse_bound(Lexer& lx, long long& k) {
    if (lx.consume_word("<=")) {
        k = lx.integer();
        if (k < 0) throw UsageError("negative step bound");
        return true;
    }
    return false;
}

std::vector<char> predicate_states(const Dtmc& d, const Predicate& p) {
    std::vector<char> in(static_cast<std::size_t>(d.n()), 0);
    for (const auto& sym : p.symbols) {
        int id = d.alphabet.find(sym);
        if (id < 0) throw UsageError("property references unknown symbol '" + sym + "'");
        for (int s = 0; s < d.n(); ++s)
            if (d.labels[static_cast<std::size_t>(s)] == id) in[static_cast<std::size_t>(s)] = 1;
    }
    return in;
}

// Probability of (A U B) within k steps (k < 0 means unbounded), per state,
// folded against the initial distribution by the caller.
std::vector<double> until_probabilities(const Dtmc& d, const std::vector<char>& a,
                                        const std::vector<char>& b, long long k) {
    const int n = d.n();
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int s = 0; s < n; ++s)
        if (b[static_cast<std::size_t>(s)]) x[static_cast<std::size_t>(s)] = 1.0;

    std::vector<char> live(static_cast<std::size_t>(n), 0);
    if (k < 0) {
        // States that can reach B along A-paths; everything else stays at
        // exactly 0 through the iteration.
        std::vector<int> stack;
        for (int s = 0; s < n; ++s)
            if (b[static_cast<std::size_t>(s)]) {
                live[static_cast<std::size_t>(s)] = 1;
                stack.push_back(s);
            }
        // Backward edges, built once.
        std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
        for (int s = 0; s < n; ++s)
            for (const auto& tr : d.rows[static_cast<std::size_t>(s)])
                if (tr.prob > 0.0) preds[static_cast<std::size_t>(tr.dst)].push_back(s);
        while (!stack.empty()) {
            int t = stack.back();
            stack.pop_back();
            for (int s : preds[static_cast<std::size_t>(t)]) {
                if (live[static_cast<std::size_t>(s)]) continue;
                if (!a[static_cast<std::size_t>(s)] || b[static_cast<std::size_t>(s)]) continue;
                live[static_cast<std::size_t>(s)] = 1;
                stack.push_back(s);
            }
        }
    }

    std::vector<double> nxt(static_cast<std::size_t>(n), 0.0);
    const double tol = 1e-12;
    const long long max_iter = k >= 0 ? k : 1000000;
    for (long long it = 0; it < max_iter; ++it) {
        double delta = 0.0;
        for (int s = 0; s < n; ++s) {
            double v;
            if (b[static_cast<std::size_t>(s)]) {
                v = 1.0;
            } else if (!a[static_cast<std::size_t>(s)] || (k < 0 && !live[static_cast<std::size_t>(s)])) {
                v = 0.0;
            } else {
                v = 0.0;
                for (const auto& tr : d.rows[static_cast<std::size_t>(s)])
                    v += tr.prob * x[static_cast<std::size_t>(tr.dst)];
            }
            nxt[static_cast<std::size_t>(s)] = v;
            delta = std::max(delta, std::abs(v - x[static_cast<std::size_t>(s)]));
        }
        std::swap(x, nxt);
        if (k < 0 && delta <= tol) return x;
    }
    if (k < 0)
        throw ConvergenceError("value iteration for unbounded property did not converge");
    return x;
}

double fold_init(const Dtmc& d, const std::vector<double>& x) {
    double p = 0.0;
    for (int s = 0; s < d.n(); ++s)
        p += d.init[static_cast<std::size_t>(s)] * x[static_cast<std::size_t>(s)];
    return p;
}

} // namespace

Property parse_property(const std::string& text) {
    Lexer lx(text);
    Property prop;
    prop.text = text;
    if (!lx.consume_word("P=?")) throw UsageError("property must start with P=?");
    if (!lx.consume('[')) throw UsageError("expected '[' after P=?");

    char c = lx.peek();
    if (c == 'F' || c == 'G') {
        lx.consume(c);
        prop.kind = c == 'F' ? PropKind::Eventually : PropKind::Globally;
        prop.bounded = parse_bound(lx, prop.bound);
        prop.right = parse_predicate(lx);
    } else {
        prop.kind = PropKind::Until;
        prop.left = parse_predicate(lx);
        if (!lx.consume('U')) throw UsageError("expected U between predicates");
        prop.bounded = parse_bound(lx, prop.bound);
        prop.right = parse_predicate(lx);
    }
    if (!lx.consume(']')) throw UsageError("expected ']' at end of property");
    if (!lx.eof()) throw UsageError("unexpected trailing text in property");
    return prop;
}

double check_property(const Dtmc& d, const Property& p) {
    auto rep = validate_dtmc(d);
    if (!rep.ok) throw UsageError("check_property on invalid model");
    long long k = p.bounded ? p.bound : -1;

    switch (p.kind) {
    case PropKind::Eventually: {
        std::vector<char> a(static_cast<std::size_t>(d.n()), 1);
        auto b = predicate_states(d, p.right);
        return fold_init(d, until_probabilities(d, a, b, k));
    }
    case PropKind::Globally: {
        // G phi  ==  1 - F (not phi)
        auto phi = predicate_states(d, p.right);
        std::vector<char> a(static_cast<std::size_t>(d.n()), 1);
        std::vector<char> not_phi(static_cast<std::size_t>(d.n()));
        for (int s = 0; s < d.n(); ++s)
            not_phi[static_cast<std::size_t>(s)] = phi[static_cast<std::size_t>(s)] ? 0 : 1;
        return 1.0 - fold_init(d, until_probabilities(d, a, not_phi, k));
    }
    case PropKind::Until: {
        auto a = predicate_states(d, p.left);
        auto b = predicate_states(d, p.right);
        return fold_init(d, until_probabilities(d, a, b, k));
    }
    }
    throw UsageError("unreachable property kind");
}

} // namespace mclearn
