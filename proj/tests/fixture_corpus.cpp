#include "fixture_corpus.hpp"

#include <json.hpp>

#include "trace/error.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using trace::Artifact;
using trace::ArtifactKind;
using trace::LabeledPair;
using trace::TraceDataset;

namespace {

std::string two_digits(int n) {
    std::string s = std::to_string(n);
    return s.size() < 2 ? "0" + s : s;
}

std::string three_digits(int n) {
    std::string s = std::to_string(n);
    while (s.size() < 3) s = "0" + s;
    return s;
}

// Word pools for deterministic, varied requirement sentences.
const char* kNouns[] = {
    "invoice",  "shipment", "catalog",  "booking",  "profile",  "voucher",  "manifest", "ledger",
    "receipt",  "itinerary", "quota",   "contract", "warranty", "deposit",  "refund",   "coupon",
    "schedule", "inventory", "payroll", "campaign", "bulletin", "dossier",  "permit",   "charter",
    "mandate",  "registry",  "docket",  "tariff",   "premium",  "portfolio", "bursary", "stipend",
    "rebate",   "cargo",     "billing", "transit",  "customs",  "audit",    "escrow",   "tenancy",
};

const char* kVerbs[] = {
    "archive", "reconcile", "validate", "forward",  "suspend", "approve", "reject",  "merge",
    "export",  "import",    "notify",   "escalate", "assign",  "release", "monitor", "restore",
    "encrypt", "publish",   "redact",   "certify",
};

const char* kQualifiers[] = {
    "nightly", "pending", "expired", "duplicate", "foreign", "priority", "archived", "draft",
    "sealed",  "batch",   "manual",  "remote",    "partial", "legacy",   "verified", "flagged",
};

// Class-name stems for the 47 cold Java classes (index 4..50 rotates here).
const char* kColdStems[] = {
    "Ledger",   "Voucher", "Catalog", "Booking",  "Profile",  "Receipt", "Quota",   "Contract",
    "Warranty", "Deposit", "Refund",  "Coupon",   "Schedule", "Payroll", "Campaign", "Bulletin",
    "Dossier",  "Permit",  "Charter", "Mandate",  "Registry", "Docket",  "Tariff",  "Premium",
};

std::string nl_requirement(int i) {
    // i is 1-based. Compose a sentence with index-rotated vocabulary so every
    // requirement has a few tokens of its own.
    const char* noun = kNouns[(i - 1) % 40];
    const char* verb = kVerbs[(i - 1) % 20];
    const char* qual = kQualifiers[(i - 1) % 16];
    const char* noun2 = kNouns[(i + 6) % 40];
    std::string s;
    s += "The system shall " + std::string(verb) + " every " + qual + " " + noun +
         " record before the " + noun2 + " queue is drained.\n";
    s += "Operators review each " + std::string(noun) + " entry and confirm the " + qual +
         " state from the administration console.\n";
    return s;
}

std::string hot_java_class(int i) {
    // The three dispatcher classes every answer row points at. The token
    // "omegabus" recurs so a pooled bag-of-words representation separates
    // pairs that target these classes.
    const std::string n = two_digits(i);
    std::string s;
    s += "public class OmegabusDispatcher" + n + " {\n";
    s += "    private final OmegabusQueue omegabusQueue;\n";
    s += "    private final OmegabusRegistry omegabusRegistry;\n\n";
    s += "    public void submitOmegabus(Request request) {\n";
    s += "        omegabusQueue.push(request);\n";
    s += "        omegabusRegistry.record(request.id());\n";
    s += "    }\n\n";
    s += "    public OmegabusStatus pollOmegabus() {\n";
    s += "        return omegabusQueue.status();\n";
    s += "    }\n";
    s += "}\n";
    return s;
}

std::string cold_java_class(int i) {
    // i is the 1-based PL index (4..50 for EBT cold classes).
    const std::string stem = kColdStems[(i - 1) % 24];
    const std::string n = two_digits(i);
    const char* verb = kVerbs[(i + 7) % 20];
    std::string s;
    s += "public class " + stem + "Service" + n + " {\n";
    s += "    private final " + stem + "Store store;\n\n";
    s += "    public " + stem + " find(String key) {\n";
    s += "        return store.lookup(key);\n";
    s += "    }\n\n";
    s += "    public void " + std::string(verb) + "(String key) {\n";
    s += "        store.touch(key);\n";
    s += "    }\n";
    s += "}\n";
    return s;
}

void write_corpus(const fs::path& dir, const std::string& name,
                  const std::vector<Artifact>& artifacts,
                  const std::vector<std::pair<std::string, std::string>>& answers) {
    fs::create_directories(dir);
    ordered_json manifest;
    manifest["name"] = name;
    manifest["languages"] = ordered_json::array({"java"});
    manifest["artifacts"] = ordered_json::array();
    for (const Artifact& a : artifacts) {
        const std::string file = a.id + ".txt";
        trace::write_text_file(dir / file, a.text);
        ordered_json entry;
        entry["id"] = a.id;
        entry["kind"] = trace::artifact_kind_name(a.kind);
        entry["lang"] = a.lang;
        entry["file"] = file;
        manifest["artifacts"].push_back(std::move(entry));
    }
    trace::write_text_file(dir / "dataset.json", manifest.dump(2) + "\n");

    std::string tsv = "# source_id\ttarget_id\n";
    for (const auto& [src, dst] : answers) tsv += src + "\t" + dst + "\n";
    trace::write_text_file(dir / "answers.tsv", tsv);
}

}  // namespace

void write_ebt_corpus(const fs::path& dir) {
    std::vector<Artifact> artifacts;
    for (int i = 1; i <= 40; ++i) {
        artifacts.push_back({"RQ" + two_digits(i), ArtifactKind::NL, nl_requirement(i), "en"});
    }
    for (int i = 1; i <= 50; ++i) {
        artifacts.push_back({"SRC" + two_digits(i), ArtifactKind::PL,
                             i <= 3 ? hot_java_class(i) : cold_java_class(i), "java"});
    }

    // 98 answers, all targeting the three dispatcher classes:
    //   RQ01..RQ18 -> SRC01, SRC02, SRC03           (54 rows)
    //   RQ19..RQ40 -> two of the three, rotating    (44 rows)
    std::vector<std::pair<std::string, std::string>> answers;
    for (int i = 1; i <= 40; ++i) {
        const std::string rq = "RQ" + two_digits(i);
        if (i <= 18) {
            answers.emplace_back(rq, "SRC01");
            answers.emplace_back(rq, "SRC02");
            answers.emplace_back(rq, "SRC03");
        } else if (i % 3 == 1) {
            answers.emplace_back(rq, "SRC01");
            answers.emplace_back(rq, "SRC02");
        } else if (i % 3 == 2) {
            answers.emplace_back(rq, "SRC02");
            answers.emplace_back(rq, "SRC03");
        } else {
            answers.emplace_back(rq, "SRC01");
            answers.emplace_back(rq, "SRC03");
        }
    }
    write_corpus(dir, "EBT", artifacts, answers);
}

void write_etour_corpus(const fs::path& dir) {
    std::vector<Artifact> artifacts;
    for (int i = 1; i <= 58; ++i) {
        artifacts.push_back({"UC" + three_digits(i), ArtifactKind::NL, nl_requirement(i), "en"});
    }
    for (int i = 1; i <= 116; ++i) {
        artifacts.push_back({"CD" + three_digits(i), ArtifactKind::PL,
                             i <= 2 ? hot_java_class(i) : cold_java_class(i), "java"});
    }

    // 308 answers: five targets per use case (290) plus one extra for the
    // first eighteen (18). Offsets are distinct, so rows never collide.
    std::vector<std::pair<std::string, std::string>> answers;
    const int offsets[] = {0, 1, 30, 60, 90};
    for (int i = 0; i < 58; ++i) {
        const std::string uc = "UC" + three_digits(i + 1);
        for (const int off : offsets) {
            answers.emplace_back(uc, "CD" + three_digits((i * 2 + off) % 116 + 1));
        }
        if (i < 18) answers.emplace_back(uc, "CD" + three_digits((i * 2 + 45) % 116 + 1));
    }
    write_corpus(dir, "eTOUR", artifacts, answers);
}

const TraceDataset& ebt_dataset() {
    static const TraceDataset ds = [] {
        const fs::path dir = fresh_temp_dir("ebt_cache");
        write_ebt_corpus(dir);
        TraceDataset loaded = trace::ingest(dir);
        fs::remove_all(dir);
        return loaded;
    }();
    return ds;
}

const TraceDataset& etour_dataset() {
    static const TraceDataset ds = [] {
        const fs::path dir = fresh_temp_dir("etour_cache");
        write_etour_corpus(dir);
        TraceDataset loaded = trace::ingest(dir);
        fs::remove_all(dir);
        return loaded;
    }();
    return ds;
}

std::vector<LabeledPair> separable_pairs() {
    std::vector<LabeledPair> pairs;
    pairs.reserve(200);
    for (int i = 0; i < 100; ++i) {
        const char* noun = kNouns[i % 40];
        const char* verb = kVerbs[i % 20];
        const std::string idx = std::to_string(i);

        LabeledPair pos;
        pos.nl_id = "sepnl" + idx + "p";
        pos.pl_id = "seppl" + idx + "p";
        pos.nl_text = "The service shall " + std::string(verb) + " the " + noun +
                      " zqlink channel entry " + idx + ".";
        pos.pl_text = "class ZqlinkHandler" + idx + " { void " + verb + "() { zqlink.emit(\"" +
                      noun + "\"); } }";
        pos.label = 1;
        pairs.push_back(std::move(pos));

        LabeledPair neg;
        neg.nl_id = "sepnl" + idx + "n";
        neg.pl_id = "seppl" + idx + "n";
        neg.nl_text = "The service shall " + std::string(verb) + " the " + noun +
                      " plain channel entry " + idx + ".";
        neg.pl_text = "class PlainHandler" + idx + " { void " + verb + "() { plain.emit(\"" +
                      noun + "\"); } }";
        neg.label = 0;
        pairs.push_back(std::move(neg));
    }
    return pairs;
}

TraceDataset tiny_dataset(int n_nl, int n_pl, const std::vector<std::pair<int, int>>& links) {
    TraceDataset ds;
    ds.name = "tiny";
    ds.languages.insert("java");
    for (int i = 1; i <= n_nl; ++i) {
        ds.add_artifact({"N" + std::to_string(i), ArtifactKind::NL,
                         "The system shall " + std::string(kVerbs[(i - 1) % 20]) + " the " +
                             kNouns[(i - 1) % 40] + " stream.",
                         "en"});
    }
    for (int i = 1; i <= n_pl; ++i) {
        ds.add_artifact({"P" + std::to_string(i), ArtifactKind::PL,
                         "class " + std::string(kColdStems[(i - 1) % 24]) + "Unit" +
                             std::to_string(i) + " { void run() {} }",
                         "java"});
    }
    for (const auto& [nl, pl] : links) {
        ds.links.push_back({"N" + std::to_string(nl), "P" + std::to_string(pl),
                            trace::LinkLabel::Positive, trace::Provenance::original()});
    }
    ds.validate();
    return ds;
}

fs::path fresh_temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("trace_fixture_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace fixtures
