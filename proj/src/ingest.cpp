#include "nbsim/ingest.hpp"

#include <fstream>
#include <iterator>

#include "nbsim/csv.hpp"
#include "nbsim/errors.hpp"
#include "source_scan.hpp"

namespace nbsim {

using nlohmann::json;

const IngestPatterns& IngestPatterns::defaults() {
    static const IngestPatterns patterns{
        {
            std::regex(R"(^\s*import\s+([A-Za-z_][\w.]*(?:\s+as\s+\w+)?(?:\s*,\s*[A-Za-z_][\w.]*(?:\s+as\s+\w+)?)*))"),
            std::regex(R"(^\s*from\s+([A-Za-z_][\w.]*)\s+import\b)"),
        },
        {
            std::regex(R"(\b(?:read_csv|read_table|read_excel|read_json|read_parquet|read_feather|read_pickle|read_sql|read_sql_query|read_hdf|DataFrame)\s*\()"),
        },
    };
    return patterns;
}

std::set<std::string> extract_libraries(std::string_view source, const IngestPatterns& patterns) {
    std::set<std::string> libraries;
    for (const auto& line : detail::split_lines(source)) {
        const std::string code = detail::strip_comment(line);
        for (const auto& re : patterns.imports) {
            std::smatch m;
            if (!std::regex_search(code, m, re) || m.size() < 2) continue;
            for (const auto& item : detail::split(m[1].str(), ',')) {
                const auto module = detail::first_word(item);
                const auto root = module.substr(0, module.find('.'));
                if (!root.empty()) libraries.insert(root);
            }
        }
    }
    return libraries;
}

namespace {

bool has_prefix_key(const json& data, std::string_view prefix) {
    for (const auto& [key, value] : data.items()) {
        if (key.rfind(prefix, 0) == 0) return true;
    }
    return false;
}

std::string joined_text(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    std::string out;
    if (value.is_array()) {
        for (const auto& part : value) {
            if (part.is_string()) out += part.get<std::string>();
        }
    }
    return out;
}

}  // namespace

OutputKind classify_output(const json& record) {
    if (!record.is_object()) throw UnknownOutputType("output record is not an object");
    const auto type = record.value("output_type", std::string{});
    if (type == "stream" || record.contains("text")) return OutputKind::Text;
    if (type == "error" || record.contains("traceback")) return OutputKind::Text;

    const auto data = record.find("data");
    if (data != record.end() && data->is_object()) {
        if (has_prefix_key(*data, "image/")) return OutputKind::Png;
        if (data->contains("application/vnd.dataresource+json")) return OutputKind::DataFrame;
        if (auto html = data->find("text/html"); html != data->end()) {
            if (joined_text(*html).find("<table") != std::string::npos) return OutputKind::DataFrame;
        }
        if (has_prefix_key(*data, "text/")) return OutputKind::Text;
    }
    throw UnknownOutputType("output record of type '" + type + "' has no recognized payload");
}

TableRefs detect_table_refs(std::string_view source, const std::set<std::string>& known_tables,
                            const IngestPatterns& patterns) {
    static const std::regex plain_assign(R"(^\s*([A-Za-z_]\w*(?:\s*,\s*[A-Za-z_]\w*)*)\s*=(?!=)(.*)$)");
    static const std::regex augmented_assign(R"(^\s*([A-Za-z_]\w*)\s*(?:[-+*/%@&|^]|//|\*\*)=)");
    static const std::regex member_assign(
        R"(^\s*([A-Za-z_]\w*)(?:\s*\[[^\]]*\]|\.\w+)+\s*(?:(?:[-+*/%@&|^]|//|\*\*)?=)(?!=))");

    TableRefs refs;
    std::set<std::string> known = known_tables;
    std::string read_scope;

    for (const auto& line : detail::split_lines(source)) {
        const std::string code = detail::strip_comment(line);
        std::smatch m;
        if (std::regex_search(code, m, plain_assign)) {
            const std::string rhs = m[2].str();
            bool produces_table = false;
            for (const auto& re : patterns.table_readers) {
                if (std::regex_search(rhs, re)) produces_table = true;
            }
            for (const auto& name : known) {
                if (detail::contains_identifier(rhs, name)) produces_table = true;
            }
            if (produces_table) {
                for (const auto& target : detail::split(m[1].str(), ',')) {
                    auto name = detail::first_word(target);
                    refs.writes.insert(name);
                    known.insert(std::move(name));
                }
            }
            read_scope += rhs;
        } else if (std::regex_search(code, m, member_assign) || std::regex_search(code, m, augmented_assign)) {
            const auto name = m[1].str();
            if (known.contains(name)) {
                refs.writes.insert(name);
                refs.reads.insert(name);
            }
            read_scope += code;
        } else {
            read_scope += code;
        }
        read_scope.push_back('\n');
    }

    for (const auto& name : known) {
        if (detail::contains_identifier(read_scope, name)) refs.reads.insert(name);
    }
    return refs;
}

Notebook parse_notebook(std::string_view document, NotebookId id, std::vector<std::string>* warnings,
                        const IngestPatterns& patterns) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw MalformedDocument(id.value + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("cells") || !doc["cells"].is_array()) {
        throw MalformedDocument(id.value + ": missing top-level 'cells' array");
    }

    Notebook nb;
    nb.id = std::move(id);
    for (const auto& cell : doc["cells"]) {
        if (!cell.is_object()) throw MalformedDocument(nb.id.value + ": cell is not an object");
        if (cell.value("cell_type", std::string{}) != "code") continue;

        const auto source = cell.find("source");
        if (source != cell.end() && !source->is_string() && !source->is_array()) {
            throw MalformedDocument(nb.id.value + ": cell source must be a string or a list of strings");
        }
        const std::size_t index = nb.cells.size();
        nb.cells.push_back(Cell{index, source == cell.end() ? std::string{} : joined_text(*source)});

        const auto outputs = cell.find("outputs");
        if (outputs == cell.end()) continue;
        if (!outputs->is_array()) throw MalformedDocument(nb.id.value + ": cell outputs must be a list");
        for (const auto& record : *outputs) {
            try {
                nb.outputs.push_back(OutputRecord{index, classify_output(record)});
            } catch (const UnknownOutputType& e) {
                if (warnings) warnings->push_back(nb.id.value + ": cell " + std::to_string(index) + ": " + e.what());
            }
        }
    }
    if (nb.cells.empty()) throw EmptyNotebook(nb.id.value + ": no code cells");

    for (const auto& cell : nb.cells) nb.libraries.merge(extract_libraries(cell.source, patterns));
    return nb;
}

TableManifest TableManifest::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw TableLoadError(file.string(), "manifest not readable");
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::ordered_json::parse_error& e) {
        throw TableLoadError(file.string(), e.what());
    }
    if (!doc.is_object()) throw TableLoadError(file.string(), "manifest must be a JSON object");

    TableManifest manifest;
    const auto base = file.parent_path();
    for (const auto& [name, path] : doc.items()) {
        if (!path.is_string()) throw TableLoadError(file.string(), "entry '" + name + "' is not a path string");
        manifest.entries.emplace_back(name, base / path.get<std::string>());
    }
    return manifest;
}

Notebook attach_tables(Notebook notebook, const TableManifest& manifest) {
    for (const auto& [name, path] : manifest.entries) {
        notebook.tables.push_back(load_delimited(path, name));
    }
    return notebook;
}

}  // namespace nbsim
