#include "gmc/io.hpp"
#include "gmc/runner.hpp"
#include "gmc/synth.hpp"
#include "gmc/textgen.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gmc;

namespace {

ErrorCode ingest_code(const std::string& text, DataKind kind, std::string* message = nullptr) {
    std::istringstream in(text);
    try {
        ingest_stream(in, kind, "mem");
    } catch (const Error& e) {
        if (message) *message = e.what();
        return e.code();
    }
    return static_cast<ErrorCode>(-1);
}

void expect_same(const Dataset& a, const Dataset& b) {
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(a.score_dim, b.score_dim);
    EXPECT_EQ(a.group_universe, b.group_universe);
    EXPECT_EQ(a.kind, b.kind);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Sample& x = a.samples[i];
        const Sample& y = b.samples[i];
        EXPECT_EQ(x.id, y.id);
        EXPECT_EQ(x.groups, y.groups);
        EXPECT_EQ(x.label, y.label);
        EXPECT_EQ(x.noise_seed, y.noise_seed);
        ASSERT_EQ(x.scores.size(), y.scores.size());
        for (Eigen::Index k = 0; k < x.scores.size(); ++k) EXPECT_EQ(x.scores(k), y.scores(k));
    }
}

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("gmc_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Key paths and JSON types of a document, sorted; arrays contribute the
// type of their first element only.
void shape_of(const Json& j, const std::string& path, std::vector<std::string>& out, bool skip_maps) {
    out.push_back(path + ":" + std::string(j.type_name()));
    if (j.is_object()) {
        // Maps keyed by data (group ids) are not part of the schema.
        const bool data_keyed = skip_maps && (path.ends_with("/per_g") || path.ends_with("/config/application"));
        if (data_keyed) return;
        for (auto it = j.begin(); it != j.end(); ++it) shape_of(it.value(), path + "/" + it.key(), out, skip_maps);
    } else if (j.is_array() && !j.empty()) {
        shape_of(j.front(), path + "[]", out, skip_maps);
    }
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Ingest, WellFormedTextgenFile) {
    const std::string text =
        "{\"id\": \"a\", \"groups\": [\"F\"], \"scores\": [0.5, 0.5], \"label\": 0, \"seed\": 3}\n"
        "{\"id\": \"b\", \"groups\": [\"M\"], \"scores\": [0.25, 0.75], \"label\": 1}\n"
        "\n"
        "{\"id\": 7, \"scores\": [1, 0], \"label\": 0}\n";
    std::istringstream in(text);
    const Dataset d = ingest_stream(in, DataKind::TextGen, "mem");
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d.score_dim, 2);
    EXPECT_EQ(d.group_universe, (std::vector<std::string>{"F", "M"}));
    EXPECT_EQ(d.samples[0].noise_seed, 3u);
    EXPECT_EQ(d.samples[1].noise_seed, 2u);
    EXPECT_EQ(d.samples[2].id, "7");
}

TEST(Ingest, RowNotADistributionNamesTheRow) {
    std::string msg;
    EXPECT_EQ(ingest_code("{\"id\": \"ok\", \"scores\": [0.5, 0.5], \"label\": 0}\n"
                          "{\"id\": \"bad-row\", \"scores\": [0.49, 0.49], \"label\": 0}\n",
                          DataKind::TextGen, &msg),
              ErrorCode::SchemaError);
    EXPECT_NE(msg.find("bad-row"), std::string::npos);
    EXPECT_NE(msg.find("mem:2"), std::string::npos);
}

TEST(Ingest, SegmentationAllZeroLabel) {
    std::string msg;
    EXPECT_EQ(ingest_code("{\"id\": \"img9\", \"scores\": [0.1, 0.2], \"label\": [0, 0]}\n", DataKind::Segmentation, &msg),
              ErrorCode::InvariantViolation);
    EXPECT_NE(msg.find("img9"), std::string::npos);
}

TEST(Ingest, SchemaDiagnostics) {
    EXPECT_EQ(ingest_code("not json\n", DataKind::Generic), ErrorCode::SchemaError);
    EXPECT_EQ(ingest_code("{\"id\": \"a\", \"scores\": [1], \"label\": 0, \"extra\": 1}\n", DataKind::Generic),
              ErrorCode::SchemaError);
    EXPECT_EQ(ingest_code("{\"id\": \"a\", \"scores\": [1, 2], \"label\": 0}\n{\"id\": \"b\", \"scores\": [1], \"label\": 0}\n",
                          DataKind::Generic),
              ErrorCode::SchemaError);
    EXPECT_EQ(ingest_code("{\"id\": \"a\", \"scores\": [0.5, 0.5], \"label\": 2}\n", DataKind::Hierarchy),
              ErrorCode::SchemaError);
    EXPECT_EQ(ingest_code("{\"id\": \"a\", \"scores\": [0.5, 0.5], \"label\": [1, 2]}\n", DataKind::Segmentation),
              ErrorCode::SchemaError);
    EXPECT_EQ(ingest_code("", DataKind::Generic), ErrorCode::SchemaError);
    try {
        ingest("/nonexistent/file.jsonl", DataKind::Generic);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}

TEST(Emit, RoundTripIsExact) {
    for (DataKind kind : {DataKind::TextGen, DataKind::Hierarchy, DataKind::Segmentation}) {
        SyntheticSpec spec;
        spec.kind = kind;
        spec.n = 200;
        spec.seed = 17;
        spec.disparity = 0.05;
        const Dataset d = synth(spec);
        std::stringstream buf;
        emit_stream(d, buf);
        const Dataset back = ingest_stream(buf, kind);
        expect_same(d, back);
    }
}

TEST(Emit, SeventeenDigitFloats) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_EQ(dump_json(Json{{"x", 0.1}}), "{\"x\":0.10000000000000001}");
}

TEST(Synth, SameSeedIsByteIdentical) {
    SyntheticSpec spec;
    spec.kind = DataKind::Segmentation;
    spec.n = 50;
    spec.seed = 5;
    std::stringstream a, b;
    emit_stream(synth(spec), a);
    emit_stream(synth(spec), b);
    EXPECT_EQ(a.str(), b.str());
    spec.seed = 6;
    std::stringstream c;
    emit_stream(synth(spec), c);
    EXPECT_NE(a.str(), c.str());
}

TEST(Synth, InvalidSpecsRejected) {
    SyntheticSpec spec;
    spec.disparity = -0.1;
    EXPECT_THROW(synth(spec), Error);
    spec = SyntheticSpec{};
    spec.vocab_size = 1;
    EXPECT_THROW(synth(spec), Error);
    spec = SyntheticSpec{};
    spec.kind = DataKind::Segmentation;
    spec.pixels = 0;
    EXPECT_THROW(synth(spec), Error);
    try {
        synthetic_spec_from_json(Json{{"application", "hierarchy"}, {"tree", {{"parents", {1, 1}}, {"leaves", 1}}}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidSpec);
    }
}

namespace {

double textgen_pre_violation(const SyntheticSpec& spec, std::size_t* class_size = nullptr) {
    const Dataset d = synth(spec);
    const auto cls = build_textgen_class(named_groups(synthetic_groups(spec)), synthetic_attributes(spec));
    if (class_size) *class_size = cls.size();
    return audit(textgen_init(spec.vocab_size), cls, textgen_s(spec.vocab_size), d, 0.01).max_violation;
}

}  // namespace

TEST(Synth, PlantedDisparityCalibration) {
    SyntheticSpec spec;
    spec.n = 5000;
    spec.disparity = 0.1;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        spec.seed = seed;
        const double v = textgen_pre_violation(spec);
        EXPECT_GE(v, 0.08);
        EXPECT_LE(v, 0.12);
    }
}

TEST(Synth, ZeroDisparityIsNoiseFloor) {
    SyntheticSpec spec;
    spec.n = 5000;
    spec.disparity = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        spec.seed = seed;
        std::size_t g = 0;
        const double v = textgen_pre_violation(spec, &g);
        EXPECT_LE(v, 2.0 * std::sqrt(std::log(static_cast<double>(g)) / spec.n));
    }
}

TEST(Tree, JsonRoundTrip) {
    const LabelTree t = LabelTree::figure_one();
    const LabelTree back = tree_from_json(tree_to_json(t));
    EXPECT_EQ(back.parents(), t.parents());
    EXPECT_EQ(back.names(), t.names());
    EXPECT_EQ(tree_from_json(Json{{"parents", {2, 2, 2}}, {"leaves", 2}}).node_count(), 3);
    EXPECT_THROW(tree_from_json(Json{{"parents", "x"}}), Error);
}

TEST(TraceDocument, RoundTrip) {
    PredictorTrace t = make_trace(Initializer::constant_value(0.1), ProjectionSpec::box(-1.01, 1.01), {});
    t.steps.push_back({"+o in Root", 0.1 / 3.0, 1});
    t.steps.push_back({"-o in Civil", 1e-7, 2});
    const Json j = Json::parse(dump_json(trace_to_json(t, "hierarchy", Json{{"sigma", 0.95}}, 0.025)));
    const TraceDocument doc = trace_from_json(j);
    EXPECT_EQ(doc.application, "hierarchy");
    EXPECT_EQ(doc.alpha, 0.025);
    EXPECT_EQ(doc.trace.init.constant(0), 0.1);
    EXPECT_EQ(doc.trace.projection.lo, -1.01);
    ASSERT_EQ(doc.trace.steps.size(), 2u);
    EXPECT_EQ(doc.trace.steps[0].eta, 0.1 / 3.0);
    EXPECT_EQ(doc.trace.steps[1].g_id, "-o in Civil");
    EXPECT_THROW(trace_from_json(Json{{"schema", "other"}}), Error);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
    const Json ok = Json::parse(R"({"application": "textgen", "synth": {"n": 10}, "gmc": {"alpha": 0.1}})");
    EXPECT_NO_THROW(RunConfig::from_json(ok));
    auto code = [](const Json& j) {
        try {
            RunConfig::from_json(j);
        } catch (const Error& e) {
            return e.code();
        }
        return static_cast<ErrorCode>(-1);
    };
    Json bad = ok;
    bad["typo"] = 1;
    EXPECT_EQ(code(bad), ErrorCode::InvalidConfig);
    bad = ok;
    bad["gmc"]["alpha"] = -1;
    EXPECT_EQ(code(bad), ErrorCode::NonPositiveAlpha);
    bad = ok;
    bad["application"] = "nope";
    EXPECT_EQ(code(bad), ErrorCode::InvalidConfig);
    bad = ok;
    bad["data"] = "x.jsonl";
    EXPECT_EQ(code(bad), ErrorCode::InvalidConfig);
    bad = ok;
    bad["hierarchy"] = Json::object();
    EXPECT_EQ(code(bad), ErrorCode::InvalidConfig);
    bad = ok;
    bad["gmc"]["split_mode"] = "split2t";
    EXPECT_EQ(code(bad), ErrorCode::InvalidConfig);
    bad = ok;
    bad["gmc"]["selection"] = "best";
    EXPECT_EQ(code(bad), ErrorCode::InvalidConfig);
}

TEST(Run, MaxIterZeroIsNonzeroExit) {
    const Json j = Json::parse(
        R"({"application": "textgen", "synth": {"n": 500, "disparity": 0.1}, "gmc": {"alpha": 0.01, "max_iter": 0}})");
    const RunOutcome out = run(RunConfig::from_json(j));
    EXPECT_NE(out.exit_code, 0);
    EXPECT_FALSE(out.report["halted_clean"].get<bool>());
    EXPECT_EQ(out.report["status"], "max_iter_exceeded");
}

TEST(Run, HierarchyTargetsMet) {
    const Json j = Json::parse(R"({"application": "hierarchy", "synth": {"n": 1500, "seed": 2},
        "hierarchy": {"sigma": 0.95}, "gmc": {"alpha": 0.025}})");
    const RunOutcome out = run(RunConfig::from_json(j));
    ASSERT_EQ(out.exit_code, 0);
    for (const auto& r : out.report["metrics"]["gmc"]["rows"])
        if (r["section"] == "event_deviation") EXPECT_LE(r["value"].get<double>(), 0.025) << r["key"];
}

TEST(Run, SegmentationTargetsMet) {
    const Json j = Json::parse(R"({"application": "segmentation", "synth": {"n": 1000, "seed": 2, "disparity": 0.2},
        "gmc": {"alpha": 0.005}})");
    const RunOutcome out = run(RunConfig::from_json(j));
    ASSERT_EQ(out.exit_code, 0);
    int rows = 0;
    for (const auto& r : out.report["metrics"]["gmc"]["rows"])
        if (r["section"] == "group_deviation") {
            ++rows;
            EXPECT_LE(r["value"].get<double>(), 0.005) << r["key"];
        }
    EXPECT_EQ(rows, 4);
}

TEST(Run, PresetsRun) {
    const auto dir = temp_dir("presets");
    {
        std::ofstream out(dir / "q.jsonl");
        for (int i = 0; i < 400; ++i) {
            const double h = std::fmod(0.37 * i, 1.0);
            out << "{\"id\": \"x" << i << "\", \"groups\": [\"" << (i % 3 ? "a" : "b") << "\"], \"scores\": [" << h
                << "], \"label\": " << (h > 0.6 ? 1 : 0) << "}\n";
        }
    }
    for (const char* kind : {"quantile", "multivalid", "happymap"}) {
        Json j{{"application", "generic-preset"},
               {"data", "q.jsonl"},
               {"preset", {{"kind", kind}}},
               {"gmc", {{"alpha", 0.02}}}};
        const RunOutcome out = run(RunConfig::from_json(j, dir.string()));
        EXPECT_EQ(out.exit_code, 0) << kind;
        EXPECT_LE(out.report["post_audit"]["max_violation"].get<double>(), 0.02) << kind;
    }
}

TEST(Run, TraceAuditReproducesPostAudit) {
    const auto dir = temp_dir("audit");
    SyntheticSpec spec;
    spec.kind = DataKind::Hierarchy;
    spec.n = 800;
    spec.seed = 12;
    emit(synth(spec), (dir / "h.jsonl").string());
    const Json j = Json::parse(R"({"application": "hierarchy", "data": "h.jsonl",
        "hierarchy": {"sigma": 0.9, "events": [{"id": "deep", "nodes": [0, 1, 2, 3]}, {"id": "Medical", "nodes": ["Medical"]}]},
        "gmc": {"alpha": 0.03}, "output": {"report": "r.json", "csv": "r.csv", "trace": "t.json"}})");
    const RunOutcome out = run(RunConfig::from_json(j, dir.string()));
    ASSERT_EQ(out.exit_code, 0);
    ASSERT_TRUE(std::filesystem::exists(dir / "r.json"));
    ASSERT_TRUE(std::filesystem::exists(dir / "r.csv"));
    EXPECT_EQ(read_file(dir / "r.csv").rfind("section,key,method,value\n", 0), 0u);
    const RunOutcome audited = audit_trace((dir / "h.jsonl").string(), (dir / "t.json").string());
    EXPECT_EQ(audited.exit_code, 0);
    EXPECT_EQ(audited.report["audit"]["max_violation"].get<double>(),
              out.report["post_audit"]["max_violation"].get<double>());
    EXPECT_EQ(audited.report["audit"]["per_g"], out.report["post_audit"]["per_g"]);
}

TEST(Run, ReportSchemaMatchesGolden) {
    const Json j = Json::parse(R"({"application": "segmentation", "synth": {"n": 300, "seed": 1, "disparity": 0.2},
        "holdout_synth": {"n": 300, "seed": 2}, "gmc": {"alpha": 0.02}})");
    const RunOutcome out = run(RunConfig::from_json(j));
    std::vector<std::string> shape;
    shape_of(Json::parse(dump_json(out.report)), "", shape, true);
    std::sort(shape.begin(), shape.end());
    std::string text;
    for (const auto& s : shape) text += s + "\n";
    const auto golden_path = std::filesystem::path(GMC_FIXTURE_DIR) / "golden_report_shape.txt";
    if (std::getenv("GMC_UPDATE_GOLDEN")) std::ofstream(golden_path) << text;
    const std::string golden = read_file(golden_path);
    EXPECT_EQ(text, golden);
    // Same seed, same bytes.
    EXPECT_EQ(dump_json(run(RunConfig::from_json(j)).report), dump_json(out.report));
}

TEST(Bounds, Report) {
    const Json b = bounds_report(16, 0.1, 0.05, 1, 1, 1, 1, 1, 0);
    EXPECT_EQ(b["sample_complexity"], 1293);
    EXPECT_EQ(b["iteration_bound"], 200);
}
