#include <doctest.h>

#include <fstream>

#include "s3d/analysis/simulation.hpp"
#include "s3d/common/hash.hpp"
#include "s3d/service/error.hpp"
#include "s3d/service/server.hpp"
#include "s3d/session/results.hpp"
#include "support/fixtures.hpp"
#include "support/http_client.hpp"

namespace http = boost::beast::http;
using nlohmann::json;
using namespace s3d::service;
using s3d::testing::get;
using s3d::testing::WsClient;

namespace {

struct Fixture {
    s3d::testing::TempDir dir;
    s3d::session::Manifest manifest = s3d::testing::materialize(s3d::analysis::compression_grid_manifest(1), dir.path());
    s3d::session::ExperimentConfig config = [this] {
        s3d::session::ExperimentConfig c;
        c.participant_name = "e2e";
        c.result_path = dir / "results";
        return c;
    }();

    ServerOptions options(std::uint16_t port = 0) const {
        ServerOptions o;
        o.port = port;
        return o;
    }
};

}  // namespace

TEST_CASE("static and geometry endpoints") {
    Fixture f;
    ExperimentServer server(f.manifest, f.config, f.options());
    server.start();
    const auto port = server.port();
    REQUIRE(port != 0);

    auto page = get(port, "/app/");
    CHECK(page.status == 200);
    CHECK(page.headers[http::field::content_type].find("text/html") == 0);
    CHECK(page.body.find("<html>") != std::string::npos);
    CHECK(get(port, "/").status == 302);
    CHECK(get(port, "/app/missing.js").status == 404);
    CHECK(get(port, "/app/../etc/passwd").status == 400);
    CHECK(get(port, "/app/%2e%2e/secret").status == 400);
    CHECK(get(port, "/session").status == 426);
    CHECK(get(port, "/app/", http::verb::post).status == 405);
    CHECK(get(port, "/nothing").status == 404);

    const auto bytes = s3d::asset::read_file(f.manifest.resolve(f.manifest.stimuli[0]));
    const auto container = container_for_file(f.manifest.resolve(f.manifest.stimuli[0]));
    const auto hash = s3d::sha256_hex(std::span<const std::byte>(container));
    auto geom = get(port, "/geom/" + hash);
    CHECK(geom.status == 200);
    CHECK(geom.body.size() == container.size());
    CHECK(s3d::sha256_hex(geom.body) == hash);
    CHECK(geom.headers[http::field::cache_control].find("immutable") != std::string::npos);
    CHECK(get(port, "/geom/" + hash, http::verb::get, {{http::field::if_none_match, "\"" + hash + "\""}}).status == 304);
    CHECK(get(port, "/geom/" + std::string(64, 'f')).status == 404);
    CHECK(get(port, "/geom/xyz").status == 404);
    CHECK(get(port, "/geom/" + hash, http::verb::head).body.empty());
}

TEST_CASE("an app directory is served with MIME types") {
    Fixture f;
    std::filesystem::create_directories(f.dir / "app/js");
    std::ofstream(f.dir / "app/index.html") << "<!doctype html><title>viewer</title>";
    std::ofstream(f.dir / "app/js/main.js") << "console.log(1);";
    auto o = f.options();
    o.app_dir = f.dir / "app";
    ExperimentServer server(f.manifest, f.config, o);
    server.start();
    auto index = get(server.port(), "/app/");
    CHECK(index.body.find("viewer") != std::string::npos);
    auto js = get(server.port(), "/app/js/main.js");
    CHECK(js.status == 200);
    CHECK(js.headers[http::field::content_type].find("text/javascript") == 0);
    CHECK(mime_type("x.wasm") == "application/wasm");
}

TEST_CASE("a full session over WebSocket, with reconnect and restart") {
    Fixture f;
    std::size_t total = 0;
    {
        ExperimentServer server(f.manifest, f.config, f.options());
        server.start();
        WsClient client(server.port());
        client.send("hello");
        auto info = client.read();
        CHECK(info["type"] == "session_info");
        total = info["payload"]["trial_count"].get<std::size_t>();
        auto trial = client.read();
        REQUIRE(trial["type"] == "trial_begin");
        CHECK(get(server.port(), trial["payload"]["impaired_asset_url"].get<std::string>()).status == 200);

        {
            WsClient intruder(server.port());
            auto refused = intruder.read();
            CHECK(refused["payload"]["code"] == "SessionOccupied");
            CHECK(intruder.read().is_null());
        }

        for (std::size_t i = 0; i < 4; ++i) {
            client.send("rating_submit", {{"trial_index", i}, {"score", 2}});
            CHECK(client.read()["type"] == "trial_ack");
            CHECK(client.read()["payload"]["trial_index"] == i + 1);
        }
    }
    {
        // restart: the journal brings the session back at trial 4
        ExperimentServer server(f.manifest, f.config, f.options());
        server.start();
        {
            WsClient client(server.port());
            client.send("hello");
            CHECK(client.read()["payload"]["completed_count"] == 4);
            CHECK(client.read()["payload"]["trial_index"] == 4);
            client.send("rating_submit", {{"trial_index", 4}, {"score", 5}});
            CHECK(client.read()["type"] == "trial_ack");
            CHECK(client.read()["type"] == "trial_begin");
        }
        // wait until the server has seen the disconnect
        std::optional<WsClient> client;
        json first;
        for (int attempt = 0; attempt < 200; ++attempt) {
            client.emplace(server.port());
            client->send("hello");
            first = client->read();
            if (first["type"] == "session_info") break;
            client.reset();
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        REQUIRE(first["type"] == "session_info");
        CHECK(client->read()["payload"]["trial_index"] == 5);
        for (std::size_t i = 5; i < total; ++i) {
            client->send("rating_submit", {{"trial_index", i}, {"score", 3}});
            CHECK(client->read()["type"] == "trial_ack");
            CHECK(client->read()["type"] == (i + 1 < total ? "trial_begin" : "session_complete"));
        }
        CHECK(server.state_snapshot().finished());
    }
    const auto rows = s3d::session::read_journal_rows(s3d::session::default_journal_path(f.config));
    REQUIRE(rows.size() == total);
    CHECK(rows[4].score == 5);
}

TEST_CASE("startup failures") {
    Fixture f;
    ExperimentServer first(f.manifest, f.config, f.options());
    try {
        auto o = f.options(first.port());
        auto c = f.config;
        c.participant_name = "other";
        ExperimentServer second(f.manifest, c, o);
        FAIL("expected PortInUse");
    } catch (const ServiceError& e) {
        CHECK(e.code() == ServiceErrc::PortInUse);
    }

    auto broken = f.manifest;
    broken.stimuli[2].asset_path = "missing.ply";
    try {
        ExperimentServer server(broken, f.config, f.options());
        FAIL("expected AssetMissing");
    } catch (const ServiceError& e) {
        CHECK(e.code() == ServiceErrc::AssetMissing);
        REQUIRE(e.details().size() == 1);
        CHECK(e.details()[0].find("missing.ply") != std::string::npos);
    }
}
