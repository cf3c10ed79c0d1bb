#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbsim/corpus.hpp"
#include "nbsim/workflow_graph.hpp"

namespace nbsim {

inline constexpr int kCorpusFormatVersion = 1;

/// Contents of `manifest.json`. Paths are relative to the corpus directory.
struct CorpusManifest {
    struct Item {
        NotebookId id;
        std::string graph_file;
        std::vector<std::string> table_files;
        TopologySignature signature;

        friend bool operator==(const Item&, const Item&) = default;
    };

    int version = kCorpusFormatVersion;
    std::vector<Item> notebooks;

    friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

/// Writes `graphs/<id>.json`, `tables/<id>/<name>.csv` and, last, the
/// manifest (via a temporary file and rename). Nodes are written in
/// (label, position) order. Throws IoError.
///
/// Saving and loading the same directory concurrently is not supported.
CorpusManifest save_corpus(const std::vector<WorkflowGraph>& graphs, const std::filesystem::path& dir);

/// Throws IoError or VersionMismatch.
CorpusManifest read_manifest(const std::filesystem::path& dir);

/// Reads the manifest eagerly; graph bodies load on first access and throw
/// CorruptGraph when unreadable. Throws IoError or VersionMismatch.
Corpus load_corpus(const std::filesystem::path& dir);

/// Ids whose stored signature differs from one recomputed from the graph
/// body (unloadable graphs are reported too).
std::vector<NotebookId> verify_index(const Corpus& corpus);

/// Graph file body. `table_files[i]` is the stored path of the i-th Data node.
nlohmann::json graph_to_json(const WorkflowGraph& graph, const std::vector<std::string>& table_files);

nlohmann::json signature_to_json(const TopologySignature& sig);
TopologySignature signature_from_json(const nlohmann::json& j);

}  // namespace nbsim
