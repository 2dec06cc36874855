#pragma once

#include "gmc/core.hpp"
#include "gmc/hierarchy.hpp"
#include "gmc/trace.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace gmc {

using Json = nlohmann::json;

// %.17g: enough digits for every double to round-trip exactly.
std::string format_double(double value);
// JSON text with every floating-point number written by format_double.
std::string dump_json(const Json& value, int indent = -1);

// JSON-lines datasets, one sample per line:
// {"id": str, "groups": [str], "scores": [num], "label": int | [0/1], "seed": uint}.
// "groups" and "seed" are optional (default [] and the 1-based line number).
Dataset ingest(const std::string& path, DataKind kind);
Dataset ingest_stream(std::istream& in, DataKind kind, const std::string& source = "<stream>");
std::string emit_line(const Sample& sample);
void emit(const Dataset& data, const std::string& path);
void emit_stream(const Dataset& data, std::ostream& out);

// {"parents": [int], "leaves": int, "names": [str] (optional)}.
LabelTree tree_from_json(const Json& j);
Json tree_to_json(const LabelTree& tree);
LabelTree load_tree(const std::string& path);

// Serialised trace. `application` and `app_config` record how to rebuild the
// function class and s, so the trace can be audited on new data.
struct TraceDocument {
    std::string application;
    Json app_config;
    double alpha = 0.0;
    PredictorTrace trace;  // functions left empty; rebuilt by the caller
};

Json trace_to_json(const PredictorTrace& trace, const std::string& application, const Json& app_config,
                   double alpha);
TraceDocument trace_from_json(const Json& j);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace gmc
