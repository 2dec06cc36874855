#include "gmc/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gmc {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

void write_json(const Json& j, std::ostringstream& out, int indent, int level) {
    const std::string pad = indent >= 0 ? std::string(static_cast<std::size_t>(indent * (level + 1)), ' ') : "";
    const std::string close_pad = indent >= 0 ? std::string(static_cast<std::size_t>(indent * level), ' ') : "";
    const char* nl = indent >= 0 ? "\n" : "";
    const char* sep = indent >= 0 ? ": " : ":";
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) { out << "{}"; return; }
            out << "{" << nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out << "," << nl;
                first = false;
                out << pad << Json(it.key()).dump() << sep;
                write_json(it.value(), out, indent, level + 1);
            }
            out << nl << close_pad << "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) { out << "[]"; return; }
            out << "[" << nl;
            bool first = true;
            for (const auto& v : j) {
                if (!first) out << "," << nl;
                first = false;
                out << pad;
                write_json(v, out, indent, level + 1);
            }
            out << nl << close_pad << "]";
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) out << "null";
            else out << format_double(v);
            return;
        }
        default: out << j.dump(); return;
    }
}

[[noreturn]] void schema_error(const std::string& source, std::size_t line, const std::string& what) {
    throw Error(ErrorCode::SchemaError, source + ":" + std::to_string(line) + ": " + what);
}

Sample parse_sample(const Json& j, DataKind kind, const std::string& source, std::size_t line) {
    if (!j.is_object()) schema_error(source, line, "expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const auto& k = it.key();
        if (k != "id" && k != "groups" && k != "scores" && k != "label" && k != "seed")
            schema_error(source, line, "unknown field '" + k + "'");
    }
    Sample s;
    if (!j.contains("id")) schema_error(source, line, "missing field 'id'");
    if (j["id"].is_string()) s.id = j["id"].get<std::string>();
    else if (j["id"].is_number_integer()) s.id = std::to_string(j["id"].get<long long>());
    else schema_error(source, line, "field 'id' must be a string or integer");

    if (j.contains("groups")) {
        if (!j["groups"].is_array()) schema_error(source, line, "field 'groups' must be an array of strings");
        for (const auto& g : j["groups"]) {
            if (!g.is_string()) schema_error(source, line, "field 'groups' must be an array of strings");
            s.groups.push_back(g.get<std::string>());
        }
        std::sort(s.groups.begin(), s.groups.end());
        s.groups.erase(std::unique(s.groups.begin(), s.groups.end()), s.groups.end());
    }

    if (!j.contains("scores") || !j["scores"].is_array() || j["scores"].empty())
        schema_error(source, line, "field 'scores' must be a non-empty array of numbers");
    const auto& sc = j["scores"];
    s.scores.resize(static_cast<Eigen::Index>(sc.size()));
    for (std::size_t i = 0; i < sc.size(); ++i) {
        if (!sc[i].is_number()) schema_error(source, line, "field 'scores' entry " + std::to_string(i) + " is not a number");
        s.scores(static_cast<Eigen::Index>(i)) = sc[i].get<double>();
    }
    if (!s.scores.allFinite()) schema_error(source, line, "field 'scores' has non-finite entries");

    if (!j.contains("label")) schema_error(source, line, "missing field 'label'");
    const auto& lab = j["label"];
    if (kind == DataKind::Segmentation) {
        if (!lab.is_array()) schema_error(source, line, "field 'label' must be a 0/1 array for segmentation");
        BinaryVector bits;
        for (const auto& b : lab) {
            if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1))
                schema_error(source, line, "field 'label' entries must be 0 or 1");
            bits.bits.push_back(static_cast<std::uint8_t>(b.get<int>()));
        }
        if (static_cast<Eigen::Index>(bits.bits.size()) != s.scores.size())
            schema_error(source, line, "field 'label' length differs from 'scores'");
        s.label = std::move(bits);
    } else {
        if (!lab.is_number_integer() || lab.get<long long>() < 0)
            schema_error(source, line, "field 'label' must be a non-negative integer");
        const int v = lab.get<int>();
        if (kind == DataKind::TextGen) s.label = TokenIndex{v};
        else s.label = ClassIndex{v};
        if ((kind == DataKind::TextGen || kind == DataKind::Hierarchy) && v >= s.scores.size())
            schema_error(source, line, "field 'label' indexes past the score vector");
    }

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
            schema_error(source, line, "field 'seed' must be a non-negative integer");
        s.noise_seed = j["seed"].get<std::uint64_t>();
    } else {
        s.noise_seed = line;
    }

    if (kind == DataKind::TextGen) {
        if (s.scores.minCoeff() < 0.0 || std::abs(s.scores.sum() - 1.0) > 1e-6) {
            std::ostringstream msg;
            msg << "row '" << s.id << "' is not a distribution (sum " << format_double(s.scores.sum()) << ")";
            schema_error(source, line, msg.str());
        }
    }
    if (kind == DataKind::Segmentation) {
        const auto& bits = std::get<BinaryVector>(s.label).bits;
        if (std::find(bits.begin(), bits.end(), 1) == bits.end())
            throw Error(ErrorCode::InvariantViolation,
                        source + ":" + std::to_string(line) + ": sample '" + s.id + "' has no positive pixels");
    }
    return s;
}

}  // namespace

std::string dump_json(const Json& value, int indent) {
    std::ostringstream out;
    write_json(value, out, indent, 0);
    return out.str();
}

Dataset ingest_stream(std::istream& in, DataKind kind, const std::string& source) {
    Dataset data;
    data.kind = kind;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(text);
        } catch (const Json::parse_error& e) {
            schema_error(source, line, std::string("invalid JSON: ") + e.what());
        }
        Sample s = parse_sample(j, kind, source, line);
        if (data.samples.empty()) data.score_dim = static_cast<int>(s.scores.size());
        else if (s.scores.size() != data.score_dim)
            schema_error(source, line, "field 'scores' has " + std::to_string(s.scores.size()) + " entries, expected " +
                                           std::to_string(data.score_dim));
        data.samples.push_back(std::move(s));
    }
    if (data.samples.empty()) throw Error(ErrorCode::SchemaError, source + ": no samples");
    data.refresh_universe();
    return data;
}

Dataset ingest(const std::string& path, DataKind kind) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return ingest_stream(in, kind, path);
}

std::string emit_line(const Sample& s) {
    std::ostringstream out;
    out << "{\"id\":" << Json(s.id).dump() << ",\"groups\":[";
    for (std::size_t i = 0; i < s.groups.size(); ++i) out << (i ? "," : "") << Json(s.groups[i]).dump();
    out << "],\"scores\":[";
    for (Eigen::Index i = 0; i < s.scores.size(); ++i) out << (i ? "," : "") << format_double(s.scores(i));
    out << "],\"label\":";
    if (auto b = std::get_if<BinaryVector>(&s.label)) {
        out << "[";
        for (std::size_t i = 0; i < b->bits.size(); ++i) out << (i ? "," : "") << static_cast<int>(b->bits[i]);
        out << "]";
    } else {
        out << label_index(s.label);
    }
    out << ",\"seed\":" << s.noise_seed << "}";
    return out.str();
}

void emit_stream(const Dataset& data, std::ostream& out) {
    for (const auto& s : data.samples) out << emit_line(s) << "\n";
}

void emit(const Dataset& data, const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    emit_stream(data, out);
}

LabelTree tree_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("parents") || !j["parents"].is_array() || !j.contains("leaves") ||
        !j["leaves"].is_number_integer())
        throw Error(ErrorCode::SchemaError, "tree must be {\"parents\": [int], \"leaves\": int}");
    std::vector<int> parents;
    for (const auto& p : j["parents"]) {
        if (!p.is_number_integer()) throw Error(ErrorCode::SchemaError, "tree parents must be integers");
        parents.push_back(p.get<int>());
    }
    std::vector<std::string> names;
    if (j.contains("names")) names = j["names"].get<std::vector<std::string>>();
    return LabelTree::from_parents(std::move(parents), j["leaves"].get<int>(), std::move(names));
}

Json tree_to_json(const LabelTree& tree) {
    return Json{{"parents", tree.parents()}, {"leaves", tree.leaf_count()}, {"names", tree.names()}};
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, path + ": invalid JSON: " + e.what());
    }
}

LabelTree load_tree(const std::string& path) { return tree_from_json(read_json_file(path)); }

void write_text_file(const std::string& path, const std::string& text) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out << text;
}

Json trace_to_json(const PredictorTrace& trace, const std::string& application, const Json& app_config,
                   double alpha) {
    Json init;
    if (trace.init.kind == Initializer::Kind::CopyScores) {
        init = {{"kind", "copy_scores"}};
    } else {
        std::vector<double> c(trace.init.constant.data(), trace.init.constant.data() + trace.init.constant.size());
        init = {{"kind", "constant"}, {"value", c}};
    }
    Json proj;
    if (trace.projection.kind == ProjectionSpec::Kind::Simplex) proj = {{"kind", "simplex"}, {"dim", trace.projection.dim}};
    else proj = {{"kind", "box"}, {"lo", trace.projection.lo}, {"hi", trace.projection.hi}};
    Json steps = Json::array();
    for (const auto& s : trace.steps) steps.push_back({{"g", s.g_id}, {"eta", s.eta}, {"t", s.iteration}});
    return Json{{"schema", "gmc-trace/1"}, {"application", application}, {"config", app_config},
                {"alpha", alpha}, {"init", init}, {"projection", proj}, {"steps", steps}};
}

TraceDocument trace_from_json(const Json& j) {
    try {
        if (j.value("schema", "") != "gmc-trace/1") throw Error(ErrorCode::SchemaError, "not a gmc-trace/1 document");
        TraceDocument doc;
        doc.application = j.at("application").get<std::string>();
        doc.app_config = j.at("config");
        doc.alpha = j.at("alpha").get<double>();
        const auto& init = j.at("init");
        if (init.at("kind") == "copy_scores") {
            doc.trace.init = Initializer::copy_scores();
        } else if (init.at("kind") == "constant") {
            const auto c = init.at("value").get<std::vector<double>>();
            doc.trace.init = Initializer::constant_vector(Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size())));
        } else {
            throw Error(ErrorCode::SchemaError, "unknown initializer kind");
        }
        const auto& proj = j.at("projection");
        if (proj.at("kind") == "simplex") doc.trace.projection = ProjectionSpec::simplex(proj.at("dim").get<int>());
        else if (proj.at("kind") == "box")
            doc.trace.projection = ProjectionSpec::box(proj.at("lo").get<double>(), proj.at("hi").get<double>());
        else throw Error(ErrorCode::SchemaError, "unknown projection kind");
        for (const auto& s : j.at("steps"))
            doc.trace.steps.push_back({s.at("g").get<std::string>(), s.at("eta").get<double>(), s.at("t").get<int>()});
        return doc;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("trace document: ") + e.what());
    }
}

}  // namespace gmc
