#include <doctest.h>

#include <sstream>

#include "s3d/analysis/simulation.hpp"
#include "s3d/session/results.hpp"
#include "support/fixtures.hpp"
#include "support/scripted.hpp"

using namespace s3d::session;

TEST_CASE("CSV field quoting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(split_csv_line("a,\"b,c\",\"d\"\"e\",") == std::vector<std::string>{"a", "b,c", "d\"e", ""});
}

TEST_CASE("result rows round trip through CSV and match the journal") {
    s3d::testing::TempDir dir;
    const auto m = s3d::analysis::compression_grid_manifest(1);
    ExperimentConfig c;
    c.participant_name = "Smith, J.";
    auto s = Session::open(m, c, dir / "j.jsonl");
    for (std::size_t i = 0; i < 6; ++i) s.record(s3d::testing::scripted_judgment(s.state(), i));

    const auto rows = result_rows(s.state(), m);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].participant == "Smith, J.");
    CHECK_FALSE(rows[0].geometry_param.empty());

    std::stringstream csv;
    write_results_csv(csv, rows);
    CHECK(csv.str().rfind(std::string(kResultsCsvHeader), 0) == 0);
    CHECK(read_results_csv(csv) == rows);

    const auto from_journal = read_journal_rows(dir / "j.jsonl");
    REQUIRE(from_journal.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(from_journal[i].stimulus_id == rows[i].stimulus_id);
        CHECK(from_journal[i].score == rows[i].score);
        CHECK(from_journal[i].is_trap_repeat == rows[i].is_trap_repeat);
    }
}
