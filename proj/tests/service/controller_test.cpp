#include <doctest.h>

#include <fstream>

#include "s3d/analysis/simulation.hpp"
#include "s3d/asset/io.hpp"
#include "s3d/asset/packed.hpp"
#include "s3d/common/hash.hpp"
#include "s3d/service/asset_catalog.hpp"
#include "s3d/service/controller.hpp"
#include "s3d/service/error.hpp"
#include "s3d/session/error.hpp"
#include "support/fixtures.hpp"

using namespace s3d::service;
using namespace std::chrono_literals;
using nlohmann::json;
using s3d::session::ExperimentConfig;
using s3d::testing::TempDir;

namespace {

std::string frame(std::string_view type, json payload = json::object()) {
    return json{{"type", type}, {"protocol_version", kProtocolVersion}, {"payload", std::move(payload)}}.dump();
}

std::vector<json> parse(const Reply& reply) {
    std::vector<json> out;
    for (const auto& f : reply.frames) out.push_back(json::parse(f));
    return out;
}

struct FakeClock {
    s3d::session::TrialTimer::Clock::time_point now{};
    Clocks clocks() {
        return {[this] { return now; }, [] { return std::string("2026-01-01T00:00:00.000Z"); }};
    }
};

struct Fixture {
    TempDir dir;
    s3d::session::Manifest manifest = s3d::testing::materialize(s3d::analysis::compression_grid_manifest(1), dir.path());
    ExperimentConfig config = [] {
        ExperimentConfig c;
        c.participant_name = "p1";
        c.display_order_seed = 3;
        return c;
    }();
    AssetCatalog catalog = AssetCatalog::build(manifest);
    FakeClock clock;

    SessionController make(std::unique_ptr<s3d::session::JournalSink> sink = nullptr) {
        auto state = s3d::session::fresh_state(s3d::session::build_playlist(manifest, config), config);
        if (!sink) {
            return SessionController(s3d::session::Session::open(manifest, config, dir / "j.jsonl"), config, catalog,
                                     clock.clocks());
        }
        return SessionController(s3d::session::Session(state, std::move(sink)), config, catalog, clock.clocks());
    }
};

struct FailingSink : s3d::session::JournalSink {
    void append(std::string_view) override {
        throw s3d::session::SessionError(s3d::session::SessionErrc::JournalWriteFailure, "disk full");
    }
};

}  // namespace

TEST_CASE("protocol encode and decode") {
    WireMessage m;
    m.type = MessageType::RatingSubmit;
    m.payload = {{"trial_index", 2}, {"score", 4}};
    const auto decoded = decode(encode(m));
    CHECK(decoded.type == MessageType::RatingSubmit);
    CHECK(decoded.payload == m.payload);

    auto code_of = [](std::string_view text) {
        try {
            (void)decode(text);
        } catch (const ProtocolError& e) {
            return e.code();
        }
        return std::string("none");
    };
    CHECK(code_of("not json") == wire_error::kMalformedMessage);
    CHECK(code_of("[1]") == wire_error::kMalformedMessage);
    CHECK(code_of(R"({"type":"hello"})") == wire_error::kMalformedMessage);
    CHECK(code_of(R"({"type":"hello","protocol_version":2})") == wire_error::kUnsupportedProtocolVersion);
    CHECK(code_of(R"({"type":"dance","protocol_version":1})") == wire_error::kUnknownMessageType);
    for (auto t : {MessageType::Hello, MessageType::SessionInfo, MessageType::TrialBegin, MessageType::TimerExpiredAck,
                   MessageType::RatingSubmit, MessageType::TrialAck, MessageType::SessionComplete, MessageType::Error,
                   MessageType::Telemetry}) {
        CHECK(message_type_from_string(to_string(t)) == t);
    }
}

TEST_CASE("catalog addresses assets by the hash of their container") {
    Fixture f;
    CHECK(f.catalog.size() == f.manifest.stimuli.size());
    for (const auto& s : f.manifest.stimuli) {
        const auto hash = f.catalog.hash_for(s.id);
        REQUIRE(hash);
        CHECK(f.catalog.url_for(s.id) == "/geom/" + *hash);
        const auto bytes = f.catalog.fetch(*hash);
        REQUIRE(bytes);
        CHECK(s3d::sha256_hex(std::span<const std::byte>(*bytes)) == *hash);
        CHECK_NOTHROW((void)s3d::asset::decode_container(*bytes));
    }
    CHECK(f.catalog.cached_entries() <= AssetCatalog::kDefaultCacheEntries);
    CHECK(f.catalog.fetch(std::string(64, '0')) == nullptr);
}

TEST_CASE("catalog cache is bounded") {
    Fixture f;
    const auto small = AssetCatalog::build(f.manifest, 2);
    for (const auto& s : f.manifest.stimuli) (void)small.fetch(*small.hash_for(s.id));
    CHECK(small.cached_entries() == 2);
}

TEST_CASE("catalog lists every missing asset") {
    Fixture f;
    auto m = f.manifest;
    m.stimuli[0].asset_path = "gone1.ply";
    m.stimuli[3].asset_path = "gone2.ply";
    try {
        (void)AssetCatalog::build(m);
        FAIL("expected failure");
    } catch (const ServiceError& e) {
        CHECK(e.code() == ServiceErrc::AssetMissing);
        CHECK(e.details().size() == 2);
    }
    m = f.manifest;
    m.stimuli[1].content_hash = std::string(64, 'a');
    try {
        (void)AssetCatalog::build(m);
        FAIL("expected failure");
    } catch (const ServiceError& e) {
        CHECK(e.code() == ServiceErrc::AssetInvalid);
    }
}

TEST_CASE("a session runs to completion over the controller") {
    Fixture f;
    auto c = f.make();
    CHECK(c.connect(1).frames.empty());
    auto out = parse(c.receive(1, frame("hello")));
    REQUIRE(out.size() == 2);
    CHECK(out[0]["type"] == "session_info");
    CHECK(out[0]["payload"]["trial_count"] == 10);
    CHECK(out[1]["type"] == "trial_begin");
    const auto& trial = out[1]["payload"];
    CHECK(trial["trial_index"] == 0);
    CHECK(trial["viewing_time_s"] == 20.0);
    CHECK(trial["display_mode"] == "simultaneous");
    CHECK(trial["rendering_mode"] == "points");
    CHECK(trial["rating_categories"] == 5);
    CHECK(trial["reference_asset_url"].get<std::string>().rfind("/geom/", 0) == 0);

    for (std::size_t i = 0; i < 10; ++i) {
        f.clock.now += 3s;
        out = parse(c.receive(1, frame("rating_submit", {{"trial_index", i}, {"score", 1 + i % 5}})));
        REQUIRE(out.size() == 2);
        CHECK(out[0]["type"] == "trial_ack");
        CHECK(out[0]["payload"]["trial_index"] == i);
        CHECK(out[1]["type"] == (i + 1 < 10 ? "trial_begin" : "session_complete"));
    }
    CHECK(c.state().finished());
    CHECK(c.state().judgments[4].view_time_ms == 3000);
}

TEST_CASE("duplicate submissions are idempotent, conflicting ones are refused") {
    Fixture f;
    auto c = f.make();
    c.connect(1);
    c.receive(1, frame("hello"));
    c.receive(1, frame("rating_submit", {{"trial_index", 0}, {"score", 4}}));
    auto out = parse(c.receive(1, frame("rating_submit", {{"trial_index", 0}, {"score", 4}})));
    CHECK(out[0]["type"] == "trial_ack");
    CHECK(out[0]["payload"]["duplicate"] == true);
    CHECK(out[1]["payload"]["trial_index"] == 1);
    CHECK(c.state().completed.size() == 1);

    out = parse(c.receive(1, frame("rating_submit", {{"trial_index", 0}, {"score", 2}})));
    REQUIRE(out.size() == 1);
    CHECK(out[0]["payload"]["code"] == "DuplicateJudgment");

    out = parse(c.receive(1, frame("rating_submit", {{"trial_index", 5}, {"score", 2}})));
    CHECK(out[0]["payload"]["code"] == "OutOfOrderTrial");
    out = parse(c.receive(1, frame("rating_submit", {{"trial_index", 1}, {"score", 9}})));
    CHECK(out[0]["payload"]["code"] == "ScoreOutOfRange");
    CHECK(c.state().completed.size() == 1);
}

TEST_CASE("protocol errors are answered, never dropped") {
    Fixture f;
    auto c = f.make();
    c.connect(1);
    auto out = parse(c.receive(1, frame("rating_submit", {{"trial_index", 0}, {"score", 3}})));
    CHECK(out[0]["payload"]["code"] == wire_error::kHelloRequired);
    out = parse(c.receive(1, R"({"type":"hello","protocol_version":9,"payload":{}})"));
    CHECK(out[0]["payload"]["code"] == wire_error::kUnsupportedProtocolVersion);
    out = parse(c.receive(1, frame("moonwalk")));
    CHECK(out[0]["payload"]["code"] == wire_error::kUnknownMessageType);
    out = parse(c.receive(1, frame("trial_begin")));
    CHECK(out[0]["payload"]["code"] == wire_error::kUnexpectedMessage);
    c.receive(1, frame("hello"));
    out = parse(c.receive(1, frame("rating_submit", {{"score", 3}})));
    CHECK(out[0]["payload"]["code"] == wire_error::kMalformedMessage);
    CHECK(c.receive(1, frame("telemetry", {{"camera", {1, 2, 3}}})).frames.empty());
}

TEST_CASE("timer expiry acknowledgements are recorded without a reply") {
    Fixture f;
    auto c = f.make();
    c.connect(1);
    c.receive(1, frame("hello"));
    CHECK(c.receive(1, frame("timer_expired_ack", {{"trial_index", 0}})).frames.empty());
    CHECK(c.expired_trials() == std::vector<std::size_t>{0});
    auto out = parse(c.receive(1, frame("timer_expired_ack", {{"trial_index", 3}})));
    CHECK(out[0]["payload"]["code"] == "OutOfOrderTrial");
    // rating after expiry is still accepted
    out = parse(c.receive(1, frame("rating_submit", {{"trial_index", 0}, {"score", 3}, {"view_time_ms", 25000}})));
    CHECK(out[0]["type"] == "trial_ack");
    CHECK(c.state().judgments[0].view_time_ms == 25000);
}

TEST_CASE("one connection at a time; reconnect resumes the current trial") {
    Fixture f;
    auto c = f.make();
    c.connect(1);
    c.receive(1, frame("hello"));
    c.receive(1, frame("rating_submit", {{"trial_index", 0}, {"score", 3}}));

    const auto rejected = c.connect(2);
    CHECK(rejected.close);
    CHECK(parse(rejected)[0]["payload"]["code"] == wire_error::kSessionOccupied);
    CHECK(c.receive(2, frame("hello")).close);

    c.disconnect(2);
    CHECK(c.active_connection() == 1);
    c.disconnect(1);
    CHECK(c.connect(2).frames.empty());
    const auto out = parse(c.receive(2, frame("hello")));
    CHECK(out[0]["payload"]["completed_count"] == 1);
    CHECK(out[1]["payload"]["trial_index"] == 1);
}

TEST_CASE("a journal failure halts the session and is reported") {
    Fixture f;
    auto c = f.make(std::make_unique<FailingSink>());
    c.connect(1);
    c.receive(1, frame("hello"));
    auto out = parse(c.receive(1, frame("rating_submit", {{"trial_index", 0}, {"score", 3}})));
    CHECK(out[0]["payload"]["code"] == "JournalWriteFailure");
    CHECK(c.halted());
    out = parse(c.receive(1, frame("rating_submit", {{"trial_index", 0}, {"score", 3}})));
    CHECK(out[0]["payload"]["code"] == wire_error::kSessionHalted);
    CHECK(c.state().completed.empty());
}
