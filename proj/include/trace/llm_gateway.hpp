#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "trace/promptgen.hpp"

namespace trace {

struct RetryPolicy {
    int max_attempts = 5;
    double backoff_base_seconds = 0.5;
};

struct ProviderConfig {
    std::string name;      // "mock", "gpt-4", "gemini-1.5-pro", ...
    std::string endpoint;  // base URL, e.g. "https://api.example.com/v1"
    std::string model;     // provider-side model id
    std::string auth_env = "TRACE_LLM_API_KEY";
    int max_parallel = 4;
    RetryPolicy retry;

    bool is_mock() const { return name == "mock"; }
    static ProviderConfig mock();
};

struct GenerationRecord {
    std::string request_id;  // 16 hex chars, stable for (provider, prompt text)
    PromptInstance prompt;
    std::string provider;
    std::string raw_output;  // verbatim, pre-cleaning
    std::string created_at;  // ISO-8601 UTC
    int attempts = 1;
};

struct BatchFailure {
    std::size_t index = 0;  // position in the input prompt list
    std::string code;       // kebab-case error code name
    std::string message;
};

struct BatchResult {
    std::vector<GenerationRecord> records;  // successes, input order
    std::vector<BatchFailure> failures;     // sorted by index
};

/// Append-only JSONL sink for generation records; safe for concurrent append.
class GenerationLog {
  public:
    explicit GenerationLog(std::string path) : path_(std::move(path)) {}
    void append(const GenerationRecord& record);
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::mutex mutex_;
};

/// Marker token: any prompt containing it makes the mock provider fail.
inline constexpr std::string_view kMockFailureMarker = "[[MOCK-FAIL]]";

/// Pure function of the prompt text; see mock contract in the gateway tests.
std::string mock_complete(const std::string& prompt_text);

GenerationRecord generate(const ProviderConfig& cfg, const PromptInstance& prompt,
                          GenerationLog* log = nullptr);

BatchResult generate_batch(const ProviderConfig& cfg, const std::vector<PromptInstance>& prompts,
                           GenerationLog* log = nullptr);

std::uint64_t fnv1a64(std::string_view data);
std::string to_hex(std::uint64_t value, int digits);

}  // namespace trace
