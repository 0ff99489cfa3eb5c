#include <cmath>
#include <string>

#include "doctest.h"
#include "test_support.hpp"

#include "mclearn/errors.hpp"
#include "mclearn/property.hpp"
#include "mclearn/smc.hpp"
#include "mclearn/traces.hpp"

using namespace mclearn;
using namespace testsup;

namespace {

Alphabet abc() {
    Alphabet al;
    al.intern("a");
    al.intern("b");
    al.intern("c");
    return al;
}

} // namespace

TEST_CASE("smc_halfwidth: frozen reference values") {
    CHECK(std::abs(smc_halfwidth(0.01, 10000) - 0.016276236307187292) <= 1e-12);
    CHECK(std::abs(smc_halfwidth(0.05, 1000) - 0.04294694083467376) <= 1e-12);
    // shrinks like 1/sqrt(N)
    CHECK(smc_halfwidth(0.01, 40000) ==
          doctest::Approx(smc_halfwidth(0.01, 10000) / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(smc_halfwidth(0.0, 100), UsageError);
    CHECK_THROWS_AS(smc_halfwidth(1.0, 100), UsageError);
    CHECK_THROWS_AS(smc_halfwidth(0.01, 0), UsageError);
}

TEST_CASE("smc_samples_for: smallest sufficient N") {
    for (double target : {0.02, 0.013, 0.05}) {
        long long n = smc_samples_for(0.01, target);
        CHECK(smc_halfwidth(0.01, n) <= target);
        CHECK(smc_halfwidth(0.01, n - 1) > target);
    }
    CHECK_THROWS_AS(smc_samples_for(0.01, 0.0), UsageError);
}

TEST_CASE("evaluate_bounded: eventually") {
    Alphabet al = abc();
    Property p = parse_property("P=? [ F<=2 \"b\" ]");
    CHECK(evaluate_bounded(p, {0, 1}, al) == 1);
    CHECK(evaluate_bounded(p, {0, 2, 2}, al) == 0);
    CHECK(evaluate_bounded(p, {0, 2}, al) == -1); // step 2 unobserved
    CHECK(evaluate_bounded(p, {1}, al) == 1);     // decided early
}

TEST_CASE("evaluate_bounded: globally") {
    Alphabet al = abc();
    Property p = parse_property("P=? [ G<=1 \"a\" ]");
    CHECK(evaluate_bounded(p, {0, 0}, al) == 1);
    CHECK(evaluate_bounded(p, {0, 1}, al) == 0);
    CHECK(evaluate_bounded(p, {0}, al) == -1);
    CHECK(evaluate_bounded(p, {1}, al) == 0); // violated at step 0
}

TEST_CASE("evaluate_bounded: until") {
    Alphabet al = abc();
    Property p = parse_property("P=? [ \"a\" U<=2 \"b\" ]");
    CHECK(evaluate_bounded(p, {0, 0, 1}, al) == 1);
    CHECK(evaluate_bounded(p, {1, 0, 0}, al) == 1); // right wins immediately
    CHECK(evaluate_bounded(p, {0, 2, 1}, al) == 0); // left breaks first
    CHECK(evaluate_bounded(p, {2}, al) == 0);
    CHECK(evaluate_bounded(p, {0, 0, 0}, al) == 0); // bound exhausted
    CHECK(evaluate_bounded(p, {0, 0}, al) == -1);
}

TEST_CASE("evaluate_bounded: guards") {
    Alphabet al = abc();
    CHECK_THROWS_AS(evaluate_bounded(parse_property("P=? [ F \"b\" ]"), {0}, al),
                    UsageError);
    CHECK_THROWS_AS(evaluate_bounded(parse_property("P=? [ F<=1 \"z\" ]"), {0}, al),
                    UsageError);
}

TEST_CASE("smc_check: deterministic estimate near the exact value") {
    Dtmc d = make_d1();
    Property p = parse_property("P=? [ F<=1 \"b\" ]");
    SmcParams sp;
    sp.delta = 0.05;
    sp.samples = 500;
    sp.seed = 9;
    SmcResult r = smc_check(d, p, sp);
    CHECK(r.samples == 500);
    CHECK(r.confidence == 0.05);
    CHECK(r.halfwidth == doctest::Approx(smc_halfwidth(0.05, 500)).epsilon(1e-12));
    CHECK(r.estimate >= 0.0);
    CHECK(r.estimate <= 1.0);
    CHECK(std::abs(r.estimate - 0.5) < 0.1); // truth is 0.5; width is 0.06

    SmcResult again = smc_check(d, p, sp);
    CHECK(again.estimate == r.estimate);
}

TEST_CASE("smc_check: certain property estimates exactly one") {
    Dtmc d = make_d1();
    Property p = parse_property("P=? [ F<=0 \"a\" ]"); // the initial label
    SmcParams sp;
    sp.samples = 64;
    sp.seed = 1;
    CHECK(smc_check(d, p, sp).estimate == 1.0);
}

TEST_CASE("smc_check: halfwidth mode derives the sample count") {
    Dtmc d = make_d1();
    Property p = parse_property("P=? [ F<=1 \"b\" ]");
    SmcParams sp;
    sp.delta = 0.05;
    sp.halfwidth = 0.05;
    sp.seed = 3;
    SmcResult r = smc_check(d, p, sp);
    CHECK(r.samples == smc_samples_for(0.05, 0.05));
    CHECK(r.halfwidth <= 0.05);
}

TEST_CASE("smc_check: parameter and property guards") {
    Dtmc d = make_d1();
    Property bounded = parse_property("P=? [ F<=1 \"b\" ]");
    SmcParams none;
    CHECK_THROWS_AS(smc_check(d, bounded, none), UsageError);
    SmcParams both;
    both.samples = 10;
    both.halfwidth = 0.1;
    CHECK_THROWS_AS(smc_check(d, bounded, both), UsageError);
    SmcParams ok;
    ok.samples = 10;
    CHECK_THROWS_AS(smc_check(d, parse_property("P=? [ F \"b\" ]"), ok), UsageError);
}

TEST_CASE("smc_check_traces: counts hits over the recorded runs in order") {
    TraceSet ts = parse_traces("a b\na b\na b\na c");
    Property p = parse_property("P=? [ F<=1 \"b\" ]");
    SmcParams sp;
    sp.samples = 4;
    SmcResult r = smc_check_traces(ts, p, sp);
    CHECK(r.estimate == 0.75);
    sp.samples = 2;
    CHECK(smc_check_traces(ts, p, sp).estimate == 1.0); // first two only
}

TEST_CASE("smc_check_traces: exhaustion and undecidable runs are errors") {
    TraceSet ts = parse_traces("a b\na");
    Property p = parse_property("P=? [ F<=1 \"b\" ]");
    SmcParams sp;
    sp.samples = 5;
    CHECK_THROWS_AS(smc_check_traces(ts, p, sp), UsageError); // only 2 runs
    sp.samples = 2;
    CHECK_THROWS_AS(smc_check_traces(ts, p, sp), UsageError); // run 1 too short
    sp.samples = 1;
    CHECK(smc_check_traces(ts, p, sp).estimate == 1.0);
}

TEST_CASE("SmcResult: report line format") {
    SmcResult r;
    r.estimate = 0.5;
    r.halfwidth = 0.05;
    r.samples = 100;
    r.confidence = 0.01;
    CHECK(r.line() == "estimate=0.5 halfwidth=0.05 samples=100 confidence=0.01");
}
