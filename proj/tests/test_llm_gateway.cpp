#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "fixture_corpus.hpp"
#include "trace/error.hpp"
#include "trace/llm_gateway.hpp"
#include "trace/promptgen.hpp"

using namespace trace;
using nlohmann::ordered_json;

namespace {

PromptInstance code_prompt(const std::string& requirement) {
    const Artifact basis{"R1", ArtifactKind::NL, requirement, "en"};
    return prompts::build_zero_shot(TemplateKind::ZeroShotCode, "java", basis);
}

PromptInstance requirement_prompt(const std::string& code) {
    const Artifact basis{"C1", ArtifactKind::PL, code, "java"};
    return prompts::build_zero_shot(TemplateKind::ZeroShotRequirements, basis.lang, basis);
}

/// Local OpenAI-compatible endpoint whose first `failures` requests return
/// the given status before succeeding.
struct StubServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::atomic<int> hits{0};

    StubServer(int failures, int fail_status, const std::string& content = "stub output") {
        server.Post("/v1/chat/completions", [this, failures, fail_status, content](
                                                const httplib::Request& req, httplib::Response& res) {
            const int n = ++hits;
            // no test assertions here: the handler runs on a server thread
            const ordered_json request = ordered_json::parse(req.body, nullptr, false);
            if (!request.contains("messages") || !request.contains("model")) {
                res.status = 422;
                res.set_content("malformed request payload", "text/plain");
                return;
            }
            if (n <= failures) {
                res.status = fail_status;
                res.set_content("try later", "text/plain");
                return;
            }
            ordered_json reply;
            reply["choices"] =
                ordered_json::array({ordered_json{{"message", ordered_json{{"content", content}}}}});
            res.set_content(reply.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~StubServer() {
        server.stop();
        thread.join();
    }

    ProviderConfig provider(int max_attempts) const {
        ProviderConfig cfg;
        cfg.name = "stub";
        cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
        cfg.model = "stub-model";
        cfg.retry.max_attempts = max_attempts;
        cfg.retry.backoff_base_seconds = 0.01;
        return cfg;
    }
};

}  // namespace

TEST_CASE("mock completion is a pure function of the prompt text") {
    const PromptInstance p = code_prompt("The system shall export reports.");
    const GenerationRecord a = generate(ProviderConfig::mock(), p);
    const GenerationRecord b = generate(ProviderConfig::mock(), p);
    CHECK(a.raw_output == b.raw_output);
    CHECK(a.request_id == b.request_id);
    CHECK(a.created_at == "1970-01-01T00:00:00Z");
    CHECK(a.attempts == 1);
    CHECK(a.provider == "mock");
    CHECK(a.request_id.size() == 16);
    for (char c : a.request_id) CHECK(std::isxdigit(static_cast<unsigned char>(c)));

    const GenerationRecord c = generate(ProviderConfig::mock(),
                                        code_prompt("The system shall import ledgers."));
    CHECK(c.raw_output != a.raw_output);
    CHECK(c.request_id != a.request_id);
}

TEST_CASE("mock code output is a fenced stub built from basis tokens") {
    const PromptInstance p = code_prompt("The parser shall Validate the UTF-8 header.");
    const std::string out = mock_complete(p.text);
    CHECK(out.rfind("Sure, here is the java code.\n\n```java\n", 0) == 0);
    CHECK(out.ends_with("```\n\nHope this helps!"));
    CHECK(out.find("void stub_") != std::string::npos);
    // lowercased alphanumeric basis tokens turn into log calls
    CHECK(out.find("    log(\"parser\");\n") != std::string::npos);
    CHECK(out.find("    log(\"validate\");\n") != std::string::npos);
    CHECK(out.find("    log(\"8\");\n") != std::string::npos);
    // all-caps runs hold together: no lower->upper camel boundary inside "UTF"
    CHECK(out.find("    log(\"utf\");\n") != std::string::npos);
    CHECK(out.find("log(\"u\")") == std::string::npos);
    // distinct-token rule: "the" appears twice in the basis but logs once
    const std::size_t first = out.find("log(\"the\")");
    REQUIRE(first != std::string::npos);
    CHECK(out.find("log(\"the\")", first + 1) == std::string::npos);
}

TEST_CASE("mock caps the stub body at 32 distinct tokens") {
    std::string requirement;
    for (int i = 0; i < 40; ++i) requirement += "token" + std::to_string(i) + " ";
    const std::string out = mock_complete(code_prompt(requirement).text);
    std::size_t logs = 0;
    for (std::size_t pos = out.find("log(\""); pos != std::string::npos;
         pos = out.find("log(\"", pos + 1)) {
        ++logs;
    }
    CHECK(logs == 32);
}

TEST_CASE("mock requirement output extracts identifier tokens") {
    const PromptInstance p =
        requirement_prompt("class ReportExporter { void writeCsvFile(Path target) {} }");
    const std::string out = mock_complete(p.text);
    CHECK(out.rfind("Here is the extracted requirement.\n", 0) == 0);
    CHECK(out.find("The system shall support") != std::string::npos);
    // camelCase identifiers are split and lowercased
    CHECK(out.find(" report") != std::string::npos);
    CHECK(out.find(" exporter") != std::string::npos);
    CHECK(out.find(" csv") != std::string::npos);
    CHECK(out.ends_with("."));
}

TEST_CASE("mock failure marker raises ProviderError") {
    const PromptInstance p = code_prompt(std::string("Fail now ") + std::string(kMockFailureMarker));
    try {
        generate(ProviderConfig::mock(), p);
        FAIL("expected ProviderError");
    } catch (const TraceError& e) {
        CHECK(e.code() == Errc::ProviderError);
    }
}

TEST_CASE("generate_batch preserves input order and isolates failures") {
    std::vector<PromptInstance> prompts;
    for (int i = 0; i < 10; ++i) {
        prompts.push_back(code_prompt("Requirement number " + std::to_string(i) + "."));
    }
    prompts[3] = code_prompt(std::string("boom ") + std::string(kMockFailureMarker));
    prompts[7] = code_prompt(std::string("boom again ") + std::string(kMockFailureMarker));

    ProviderConfig cfg = ProviderConfig::mock();
    cfg.max_parallel = 3;
    const BatchResult result = generate_batch(cfg, prompts);

    REQUIRE(result.records.size() == 8);
    REQUIRE(result.failures.size() == 2);
    CHECK(result.failures[0].index == 3);
    CHECK(result.failures[1].index == 7);
    CHECK(result.failures[0].code == "provider-error");

    // records keep input order with the failed slots removed
    std::size_t r = 0;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        if (i == 3 || i == 7) continue;
        CHECK(result.records[r].prompt.text == prompts[i].text);
        CHECK(result.records[r].raw_output == mock_complete(prompts[i].text));
        ++r;
    }

    CHECK(generate_batch(cfg, {}).records.empty());
}

TEST_CASE("generation log appends one JSON line per record") {
    const std::filesystem::path dir = fixtures::fresh_temp_dir("genlog");
    const std::filesystem::path path = dir / "generations.jsonl";
    {
        GenerationLog log(path.string());
        generate(ProviderConfig::mock(), code_prompt("Log me."), &log);
        generate(ProviderConfig::mock(), requirement_prompt("class A { void b() {} }"), &log);
    }
    std::ifstream in(path);
    std::string line;
    std::vector<ordered_json> rows;
    while (std::getline(in, line)) rows.push_back(ordered_json::parse(line));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].at("provider") == "mock");
    CHECK(rows[0].at("attempts") == 1);
    CHECK(rows[0].at("prompt").at("kind") == "zero_shot_code");
    CHECK(rows[0].at("prompt").at("basis_artifact_id") == "R1");
    CHECK(rows[0].at("prompt").at("example_pair_id").is_null());
    CHECK(rows[1].at("prompt").at("kind") == "zero_shot_requirements");
    CHECK(rows[0].at("raw_output").get<std::string>() ==
          mock_complete(rows[0].at("prompt").at("text").get<std::string>()));
    std::filesystem::remove_all(dir);
}

TEST_CASE("missing API key fails fast with AuthMissing") {
    ProviderConfig cfg;
    cfg.name = "real";
    cfg.endpoint = "http://127.0.0.1:1/v1";
    cfg.auth_env = "TRACE_TEST_UNSET_KEY";
    ::unsetenv("TRACE_TEST_UNSET_KEY");
    try {
        generate(cfg, code_prompt("x"));
        FAIL("expected AuthMissing");
    } catch (const TraceError& e) {
        CHECK(e.code() == Errc::AuthMissing);
        CHECK(e.message().find("TRACE_TEST_UNSET_KEY") != std::string::npos);
    }
}

TEST_CASE("transient 5xx and 429 responses are retried until success") {
    ::setenv("TRACE_LLM_API_KEY", "test-key", 1);

    SUBCASE("two 500s then success") {
        StubServer stub(2, 500, "eventual output");
        const GenerationRecord rec = generate(stub.provider(5), code_prompt("retry me"));
        CHECK(rec.attempts == 3);
        CHECK(rec.raw_output == "eventual output");
        CHECK(stub.hits.load() == 3);
    }
    SUBCASE("429 then success") {
        StubServer stub(1, 429);
        const GenerationRecord rec = generate(stub.provider(3), code_prompt("rate limited"));
        CHECK(rec.attempts == 2);
    }
    SUBCASE("persistent failure exhausts the retry budget") {
        StubServer stub(100, 503);
        try {
            generate(stub.provider(2), code_prompt("never works"));
            FAIL("expected RetryExhausted");
        } catch (const TraceError& e) {
            CHECK(e.code() == Errc::RetryExhausted);
        }
        CHECK(stub.hits.load() == 2);
    }
    SUBCASE("client errors are not retried") {
        StubServer stub(100, 400);
        try {
            generate(stub.provider(5), code_prompt("bad request"));
            FAIL("expected ProviderError");
        } catch (const TraceError& e) {
            CHECK(e.code() == Errc::ProviderError);
        }
        CHECK(stub.hits.load() == 1);
    }
    SUBCASE("success carries the choices content through") {
        StubServer stub(0, 500, "the real content");
        const GenerationRecord rec = generate(stub.provider(1), requirement_prompt("class Q {}"));
        CHECK(rec.raw_output == "the real content");
        CHECK(rec.provider == "stub");
    }
}
