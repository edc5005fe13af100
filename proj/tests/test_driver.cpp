#include <doctest.h>

#include "klrace/driver.hpp"
#include "test_util.hpp"

using namespace klrace;
using namespace klrace::driver;
using V = symexec::Verdict;
using O = concrete::OracleVerdict::Kind;

TEST_CASE("inputs file format")
{
    auto in = parse_inputs("# launch\nA = [1, -2, 3]\n\nn = -7   # trailing\nB = []\n");
    CHECK(in.arrays.at("A") == std::vector<concrete::Value>{1, -2, 3});
    CHECK(in.arrays.at("B").empty());
    CHECK(in.scalars.at("n") == -7);

    CHECK_THROWS_AS(parse_inputs("A = [1, 2"), UsageError);
    CHECK_THROWS_AS(parse_inputs("A 3"), UsageError);
    CHECK_THROWS_AS(parse_inputs("A = 1\nA = 2"), UsageError);
    CHECK_THROWS_AS(parse_inputs("3x = 1"), UsageError);
    CHECK_THROWS_AS(parse_inputs("n = 1.5"), UsageError);
    CHECK_THROWS_WITH_AS(parse_inputs("\n\nA = [1,,2]"), doctest::Contains("line 3"), UsageError);
}

TEST_CASE("agreement classes")
{
    CHECK(classify(V::RaceFree, O::RaceFree) == Agreement::Agree);
    CHECK(classify(V::PotentialRace, O::Race) == Agreement::Agree);
    CHECK(classify(V::DefiniteError, O::RuntimeError) == Agreement::Agree);
    CHECK(classify(V::PotentialRace, O::RaceFree) == Agreement::AnalyzerOverApproximates);
    CHECK(classify(V::Inconclusive, O::RaceFree) == Agreement::AnalyzerOverApproximates);
    // The only direction in which the analyzer is allowed to miss.
    CHECK(classify(V::RaceFree, O::Race) == Agreement::KnownUnsoundMiss);
    CHECK(classify(V::RaceFree, O::RuntimeError) == Agreement::DisagreeUnexpected);
    CHECK(classify(V::DefiniteError, O::RaceFree) == Agreement::DisagreeUnexpected);

    // known-unsound-miss appears for exactly one pair.
    int misses = 0;
    for (V v : {V::RaceFree, V::PotentialRace, V::DefiniteError, V::Inconclusive})
        for (O o : {O::RaceFree, O::Race, O::RuntimeError, O::Inconclusive})
            misses += classify(v, o) == Agreement::KnownUnsoundMiss;
    CHECK(misses == 1);
}

TEST_CASE("exit code is a function of the verdicts")
{
    CombinedReport r;
    r.analyzer = symexec::AnalysisReport{};
    CHECK(exit_code(r) == 0);
    r.analyzer->verdict = V::Inconclusive;
    CHECK(exit_code(r) == 3);
    r.oracle = concrete::OracleVerdict{};
    r.oracle->kind = O::Race;
    CHECK(exit_code(r) == 1);
    r.oracle->kind = O::RuntimeError;
    CHECK(exit_code(r) == 2);
    r.analyzer->verdict = V::RaceFree;
    r.oracle->kind = O::RaceFree;
    CHECK(exit_code(r) == 0);
    CHECK(to_json(r)["exit_code"] == 0);
}

TEST_CASE("run: both engines on the counter example")
{
    RunConfig cfg;
    cfg.kernel_path = klrace::testing::source_path("corpus/fig2.kl");
    cfg.inputs_path = klrace::testing::source_path("corpus/inputs/fig2.txt");
    cfg.mode = Mode::Both;
    cfg.threads = 2;
    auto r = run(cfg);
    REQUIRE(r.analyzer);
    REQUIRE(r.oracle);
    CHECK(r.analyzer->verdict == V::RaceFree);
    CHECK(r.oracle->kind == O::Race);
    CHECK(*r.agreement == Agreement::KnownUnsoundMiss);
    CHECK(exit_code(r) == 1);

    // Without the launch facts the analyzer cannot bound A[tid + 1].
    cfg.launch_facts = false;
    CHECK(run(cfg).analyzer->verdict == V::DefiniteError);
    cfg.preconditions = {"nthreads < size(A)"};
    CHECK(run(cfg).analyzer->verdict == V::RaceFree);
}

TEST_CASE("corpus gate passes")
{
    auto r = corpus_check(klrace::testing::source_path("corpus/manifest.json"));
    for (const auto& row : r.rows)
        for (const auto& d : row.drift)
            MESSAGE(row.entry.name << ": " << d);
    CHECK(r.ok());
    CHECK(r.rows.size() >= 9);
    CHECK(to_json(r, false).dump() == to_json(corpus_check(klrace::testing::source_path("corpus/manifest.json")), false).dump());
}
