#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "codeshift/corpus.hpp"
#include "codeshift/lexer.hpp"

namespace codeshift {

// Rooted ordered tree. A node with no children is a leaf and its label is
// the token text; internal labels name the structural role (root, stmt,
// block, paren, bracket, brace).
struct CstNode {
    std::string label;
    std::vector<CstNode> children;

    bool is_leaf() const { return children.empty(); }

    friend bool operator==(const CstNode&, const CstNode&) = default;
};

struct CstTree {
    std::string file_id;
    CstNode root;

    std::vector<std::string> leaf_labels() const; // left-to-right
    std::size_t internal_node_count() const;

    friend bool operator==(const CstTree&, const CstTree&) = default;
};

// One entry per internal node: the multiset of leaf labels under it, in a
// canonical encoded form (sorted labels, length-prefix joined). Using the
// full encoding as the multiset key makes hash collisions harmless; the
// table falls back to whole-string comparison.
struct ClusterMultiset {
    std::vector<std::string> encoded; // sorted, may contain duplicates

    std::size_t size() const { return encoded.size(); }

    friend bool operator==(const ClusterMultiset&, const ClusterMultiset&) = default;
};

struct RfDistance {
    std::uint64_t raw = 0;  // multiset symmetric difference |C1 delta C2|
    double normalized = 0.0; // raw / (|C1| + |C2|), 0 when both empty
};

struct DistanceMatrix {
    std::string task_id;
    std::vector<std::string> file_ids;
    std::vector<std::vector<double>> d; // symmetric, zero diagonal, in [0,1]
    std::vector<double> avg;            // mean distance to the other files

    friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;
};

// Builds the structural skeleton tree for a lexed file. Internal nodes are
// the file root, one node per statement group, and one node per indentation
// block (Python) or bracketed region (Java). Comment tokens are dropped;
// newline/indent/dedent drive the structure and do not appear as leaves.
// Throws ParseError on unbalanced brackets or a dedent with no open block.
CstTree parse_structural(const TokenSeq& seq, Language language);

// S-expression interop for trees produced by full-grammar parsers.
// Format: (label child child ...), internal labels bare atoms, leaves
// double-quoted with \" and \\ escapes. One tree per file.
CstTree load_external_tree(const std::filesystem::path& path, const std::string& file_id = "");
CstTree parse_tree_sexpr(const std::string& text, const std::string& file_id);
std::string serialize_tree_sexpr(const CstTree& tree);

ClusterMultiset cluster_multisets(const CstTree& t);

// Rooted Robinson-Foulds analog over leaf-label cluster multisets.
RfDistance rf_distance(const CstTree& t1, const CstTree& t2);
RfDistance rf_distance(const ClusterMultiset& c1, const ClusterMultiset& c2);

// Full pairwise normalized distance matrix for one task. Pairs are computed
// as a parallel map over the upper triangle; every pair writes disjoint
// cells so the job count never shows in the result.
// Throws TooFewFiles for fewer than 2 trees.
DistanceMatrix distance_matrix(std::span<const CstTree> trees, const std::string& task_id,
                               unsigned jobs = 1);

// {"task_id", "file_ids", "d", "avg"}; distances printed with 9 significant
// digits.
std::string serialize_distance_matrix(const DistanceMatrix& m);
DistanceMatrix parse_distance_matrix(const std::string& json_text);

} // namespace codeshift
