#include "trace/llm_gateway.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "trace/error.hpp"
#include "trace/rng.hpp"

namespace trace {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
#if defined(_WIN32)
    gmtime_s(&tm, &t);
#else
    gmtime_r(&t, &tm);
#endif
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// -------- mock provider: a pure function of the prompt text --------

std::vector<std::string> mock_nl_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// identifier tokens: split on non-alnum, then on underscores and camelCase humps
std::vector<std::string> mock_identifier_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string word;
    auto flush_word = [&] {
        if (word.empty()) return;
        std::string piece;
        bool prev_lower = false;  // case of the original character, not the stored one
        for (const char c : word) {
            if (c == '_') {
                if (!piece.empty()) out.push_back(piece), piece.clear();
                prev_lower = false;
                continue;
            }
            if (std::isupper(static_cast<unsigned char>(c)) && prev_lower && !piece.empty()) {
                out.push_back(piece);
                piece.clear();
            }
            piece.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            prev_lower = std::islower(static_cast<unsigned char>(c)) != 0;
        }
        if (!piece.empty()) out.push_back(piece);
        word.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '_') word.push_back(static_cast<char>(c));
        else flush_word();
    }
    flush_word();
    return out;
}

std::vector<std::string> distinct_keep_order(const std::vector<std::string>& tokens, std::size_t cap) {
    std::vector<std::string> out;
    for (const std::string& t : tokens) {
        if (std::find(out.begin(), out.end(), t) != out.end()) continue;
        out.push_back(t);
        if (out.size() >= cap) break;
    }
    return out;
}

std::string token_digest8(const std::vector<std::string>& tokens) {
    std::string joined;
    for (const std::string& t : tokens) {
        joined += t;
        joined.push_back('\x1f');
    }
    return to_hex(fnv1a64(joined) & 0xffffffffULL, 8);
}

struct ParsedPrompt {
    TemplateKind kind;
    std::string lang;   // empty for requirement prompts
    std::string basis;  // the artifact text the prompt asks about
};

std::string slice_between(const std::string& text, const std::string& after, const std::string& before,
                          bool last_after) {
    const std::size_t start_anchor = last_after ? text.rfind(after) : text.find(after);
    if (start_anchor == std::string::npos) {
        throw TraceError(Errc::ProviderError, "mock: prompt missing anchor '" + after + "'");
    }
    const std::size_t start = start_anchor + after.size();
    const std::size_t stop = text.find(before, start);
    if (stop == std::string::npos) {
        throw TraceError(Errc::ProviderError, "mock: prompt missing anchor '" + before + "'");
    }
    return text.substr(start, stop - start);
}

ParsedPrompt parse_prompt(const std::string& text) {
    ParsedPrompt p{};
    if (text.starts_with("# CONTEXT #\n\nI want to generate")) {
        p.kind = TemplateKind::ZeroShotCode;
        p.basis = slice_between(text, "following requirements.\n\n", "\n\n# OBJECTIVE #", false);
    } else if (text.starts_with("# CONTEXT #\n\nI want to summarize")) {
        p.kind = TemplateKind::ZeroShotRequirements;
        p.basis = slice_between(text, "following code.\n", "\n\n# OBJECTIVE #", false);
    } else if (text.starts_with("Generate the corresponding")) {
        p.kind = TemplateKind::FewShotCode;
    } else if (text.starts_with("Summarize the corresponding")) {
        p.kind = TemplateKind::FewShotRequirements;
    } else {
        throw TraceError(Errc::ProviderError, "mock: unrecognized prompt shape");
    }
    if (is_few_shot(p.kind)) {
        if (!text.ends_with("\n\n>>>")) {
            throw TraceError(Errc::ProviderError, "mock: few-shot prompt does not end with '>>>'");
        }
        const std::size_t open = text.rfind("###\n\n<<<\n\n");
        if (open == std::string::npos) {
            throw TraceError(Errc::ProviderError, "mock: few-shot prompt missing task block");
        }
        const std::size_t start = open + std::string("###\n\n<<<\n\n").size();
        p.basis = text.substr(start, text.size() - std::string("\n\n>>>").size() - start);
    }
    if (generates_code(p.kind)) {
        p.lang = slice_between(text, "the corresponding ", " code based on", false);
    }
    return p;
}

std::string mock_code_output(const ParsedPrompt& p) {
    const std::vector<std::string> tokens = mock_nl_tokens(p.basis);
    const std::string digest = token_digest8(tokens);
    const std::vector<std::string> distinct = distinct_keep_order(tokens, 32);

    std::string body;
    body += "// stub " + digest + "\n";
    body += "void stub_" + digest + "() {\n";
    for (const std::string& t : distinct) {
        body += "    log(\"" + t + "\");\n";
    }
    body += "}";

    std::string out;
    out += "Sure, here is the " + p.lang + " code.\n\n";
    out += "```" + p.lang + "\n" + body + "\n```\n\n";
    out += "Hope this helps!";
    return out;
}

std::string mock_requirement_output(const ParsedPrompt& p) {
    const std::vector<std::string> distinct = distinct_keep_order(mock_identifier_tokens(p.basis), 32);
    std::string sentence = "The system shall support";
    for (const std::string& t : distinct) sentence += " " + t;
    sentence += ".";
    return "Here is the extracted requirement.\n" + sentence;
}

// -------- real providers: OpenAI-compatible chat completions --------

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // leading path prefix, possibly empty
};

SplitUrl split_url(const std::string& endpoint) {
    const std::size_t scheme = endpoint.find("://");
    if (scheme == std::string::npos) {
        throw TraceError(Errc::ConfigError, "endpoint URL missing scheme: '" + endpoint + "'");
    }
    const std::size_t slash = endpoint.find('/', scheme + 3);
    if (slash == std::string::npos) return {endpoint, ""};
    std::string path = endpoint.substr(slash);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {endpoint.substr(0, slash), path};
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || (status >= 500 && status <= 599);
}

std::string http_complete(const ProviderConfig& cfg, const PromptInstance& prompt,
                          const std::string& request_id, int* attempts_out) {
    const char* key = std::getenv(cfg.auth_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw TraceError(Errc::AuthMissing,
                         "environment variable '" + cfg.auth_env + "' is not set for provider '" +
                             cfg.name + "'");
    }

    const SplitUrl url = split_url(cfg.endpoint);
    ordered_json payload;
    payload["model"] = cfg.model;
    payload["messages"] = ordered_json::array({ordered_json{{"role", "user"}, {"content", prompt.text}}});
    const std::string body = payload.dump();

    Rng jitter_rng(fnv1a64(request_id));
    std::string last_error;
    for (int attempt = 1; attempt <= cfg.retry.max_attempts; ++attempt) {
        *attempts_out = attempt;
        if (attempt > 1) {
            const double back = cfg.retry.backoff_base_seconds * static_cast<double>(1ULL << (attempt - 2));
            const double sleep_s = back * (1.0 + 0.5 * jitter_rng.unit_real());
            std::this_thread::sleep_for(std::chrono::duration<double>(sleep_s));
        }

        httplib::Client client(url.base);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(120, 0);
        client.set_bearer_token_auth(key);
        httplib::Result res = client.Post(url.path + "/chat/completions", body, "application/json");

        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;  // transport errors are retryable
        }
        if (res->status == 200) {
            ordered_json reply;
            try {
                reply = ordered_json::parse(res->body);
            } catch (const ordered_json::parse_error& e) {
                throw TraceError(Errc::ProviderError,
                                 "provider '" + cfg.name + "' returned unparseable body: " + e.what());
            }
            if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty() ||
                !reply["choices"][0].contains("message") ||
                !reply["choices"][0]["message"].contains("content")) {
                throw TraceError(Errc::ProviderError,
                                 "provider '" + cfg.name + "' reply missing choices[0].message.content");
            }
            return reply["choices"][0]["message"]["content"].get<std::string>();
        }
        if (retryable_status(res->status)) {
            last_error = "status " + std::to_string(res->status);
            continue;
        }
        throw TraceError(Errc::ProviderError, "provider '" + cfg.name + "' returned status " +
                                                  std::to_string(res->status) + ": " + res->body);
    }
    throw TraceError(Errc::RetryExhausted, "provider '" + cfg.name + "' failed after " +
                                               std::to_string(cfg.retry.max_attempts) +
                                               " attempts; last error: " + last_error);
}

}  // namespace

ProviderConfig ProviderConfig::mock() {
    ProviderConfig cfg;
    cfg.name = "mock";
    cfg.endpoint = "mock://local";
    cfg.model = "mock";
    cfg.max_parallel = 4;
    return cfg;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t value, int digits) {
    static const char* kHex = "0123456789abcdef";
    std::string out(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[value & 0xF];
        value >>= 4;
    }
    return out;
}

std::string mock_complete(const std::string& prompt_text) {
    if (prompt_text.find(kMockFailureMarker) != std::string::npos) {
        throw TraceError(Errc::ProviderError, "mock: failure marker present in prompt");
    }
    const ParsedPrompt parsed = parse_prompt(prompt_text);
    return generates_code(parsed.kind) ? mock_code_output(parsed) : mock_requirement_output(parsed);
}

void GenerationLog::append(const GenerationRecord& record) {
    ordered_json j;
    j["request_id"] = record.request_id;
    j["provider"] = record.provider;
    j["created_at"] = record.created_at;
    j["attempts"] = record.attempts;
    j["prompt"] = ordered_json{{"kind", std::string(template_kind_name(record.prompt.kind))},
                               {"basis_artifact_id", record.prompt.basis_artifact_id},
                               {"text", record.prompt.text}};
    if (record.prompt.example_pair_id) {
        j["prompt"]["example_pair_id"] =
            ordered_json::array({record.prompt.example_pair_id->first, record.prompt.example_pair_id->second});
    } else {
        j["prompt"]["example_pair_id"] = nullptr;
    }
    j["raw_output"] = record.raw_output;

    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw TraceError(Errc::IoError, "cannot open generation log '" + path_ + "'");
    out << j.dump() << '\n';
    if (!out) throw TraceError(Errc::IoError, "write to generation log '" + path_ + "' failed");
}

GenerationRecord generate(const ProviderConfig& cfg, const PromptInstance& prompt, GenerationLog* log) {
    if (cfg.max_parallel < 1) throw TraceError(Errc::ConfigError, "max_parallel must be >= 1");
    if (cfg.retry.max_attempts < 1) throw TraceError(Errc::ConfigError, "max_attempts must be >= 1");

    GenerationRecord record;
    record.provider = cfg.name;
    record.prompt = prompt;
    record.request_id = to_hex(fnv1a64(cfg.name + "\x1f" + prompt.text), 16);

    if (cfg.is_mock()) {
        record.raw_output = mock_complete(prompt.text);
        record.created_at = "1970-01-01T00:00:00Z";
        record.attempts = 1;
    } else {
        int attempts = 0;
        record.raw_output = http_complete(cfg, prompt, record.request_id, &attempts);
        record.created_at = iso8601_now();
        record.attempts = attempts;
    }
    if (log != nullptr) log->append(record);
    return record;
}

BatchResult generate_batch(const ProviderConfig& cfg, const std::vector<PromptInstance>& prompts,
                           GenerationLog* log) {
    BatchResult result;
    if (prompts.empty()) return result;

    // auth is a batch precondition: check once, before spawning workers
    if (!cfg.is_mock()) {
        const char* key = std::getenv(cfg.auth_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw TraceError(Errc::AuthMissing,
                             "environment variable '" + cfg.auth_env + "' is not set for provider '" +
                                 cfg.name + "'");
        }
    }

    std::vector<std::optional<GenerationRecord>> slots(prompts.size());
    std::vector<std::optional<BatchFailure>> errors(prompts.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= prompts.size()) return;
            try {
                slots[i] = generate(cfg, prompts[i], log);
            } catch (const TraceError& e) {
                errors[i] = BatchFailure{i, std::string(errc_name(e.code())), e.what()};
            } catch (const std::exception& e) {
                errors[i] = BatchFailure{i, std::string(errc_name(Errc::ProviderError)), e.what()};
            }
        }
    };

    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.max_parallel), prompts.size());
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    for (std::size_t i = 0; i < prompts.size(); ++i) {
        if (slots[i]) result.records.push_back(std::move(*slots[i]));
        if (errors[i]) result.failures.push_back(std::move(*errors[i]));
    }
    return result;
}

}  // namespace trace
