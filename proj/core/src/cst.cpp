#include "codeshift/cst.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "codeshift/error.hpp"
#include "codeshift/io.hpp"
#include "codeshift/parallel.hpp"

using json = nlohmann::json;

namespace codeshift {

namespace {

void collect_leaves(const CstNode& node, std::vector<std::string>& out) {
    if (node.is_leaf()) {
        out.push_back(node.label);
        return;
    }
    for (const auto& child : node.children) collect_leaves(child, out);
}

std::size_t count_internal(const CstNode& node) {
    if (node.is_leaf()) return 0;
    std::size_t n = 1;
    for (const auto& child : node.children) n += count_internal(child);
    return n;
}

} // namespace

std::vector<std::string> CstTree::leaf_labels() const {
    std::vector<std::string> out;
    if (!root.is_leaf()) collect_leaves(root, out);
    return out;
}

std::size_t CstTree::internal_node_count() const { return count_internal(root); }

// ---- structural skeleton parser -------------------------------------------

namespace {

bool is_structural(const Token& t) {
    return t.category == TokenCategory::newline || t.category == TokenCategory::indent ||
           t.category == TokenCategory::dedent;
}

CstNode make_leaf(const Token& t) { return CstNode{t.text, {}}; }

// Python: root / stmt / block. A block opened by INDENT hangs off the
// preceding statement (the compound-statement header); a stray dedent is a
// ParseError.
CstTree parse_python(const TokenSeq& seq) {
    CstTree tree{seq.file_id, CstNode{"root", {}}};

    // Stack of open block nodes; stmt under construction per level.
    std::vector<CstNode> blocks;
    blocks.push_back(std::move(tree.root));
    std::vector<CstNode> stmts;
    stmts.push_back(CstNode{"stmt", {}});

    auto close_stmt = [&]() {
        if (!stmts.back().children.empty()) {
            blocks.back().children.push_back(std::move(stmts.back()));
        }
        stmts.back() = CstNode{"stmt", {}};
    };

    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        const Token& tok = seq.tokens[i];
        if (tok.category == TokenCategory::comment) continue;
        if (tok.category == TokenCategory::newline) {
            close_stmt();
            continue;
        }
        if (tok.category == TokenCategory::indent) {
            // The header statement is still pending; the block becomes its child.
            blocks.push_back(CstNode{"block", {}});
            stmts.push_back(CstNode{"stmt", {}});
            continue;
        }
        if (tok.category == TokenCategory::dedent) {
            if (blocks.size() < 2) throw ParseError(i, "dedent with no open block");
            close_stmt();
            stmts.pop_back();
            CstNode block = std::move(blocks.back());
            blocks.pop_back();
            // Attach to the last statement of the enclosing level if there is
            // one (the compound header); otherwise to the level itself.
            auto& parent = blocks.back();
            if (!parent.children.empty() && parent.children.back().label == "stmt" &&
                stmts.back().children.empty()) {
                parent.children.back().children.push_back(std::move(block));
            } else if (!stmts.back().children.empty()) {
                stmts.back().children.push_back(std::move(block));
                close_stmt();
            } else {
                parent.children.push_back(std::move(block));
            }
            continue;
        }
        stmts.back().children.push_back(make_leaf(tok));
    }

    close_stmt();
    if (blocks.size() != 1) throw ParseError(seq.tokens.size(), "unterminated block");
    tree.root = std::move(blocks.back());
    return tree;
}

// Java: root / stmt / paren|bracket|brace. Statement grouping applies at
// top level and inside braces; parens and brackets keep raw token children.
CstTree parse_java(const TokenSeq& seq) {
    struct Frame {
        CstNode node;
        bool grouping;       // stmt grouping active ({} and top level)
        CstNode stmt;        // pending stmt when grouping
        char open_char = 0;
    };

    auto bracket_label = [](char c) -> std::string {
        switch (c) {
        case '(': return "paren";
        case '[': return "bracket";
        default: return "brace";
        }
    };
    auto closer_for = [](char c) { return c == '(' ? ')' : c == '[' ? ']' : '}'; };

    std::vector<Frame> stack;
    stack.push_back({CstNode{"root", {}}, true, CstNode{"stmt", {}}, 0});

    auto sink = [&]() -> std::vector<CstNode>& {
        Frame& f = stack.back();
        return f.grouping ? f.stmt.children : f.node.children;
    };
    auto close_stmt = [&](Frame& f) {
        if (f.grouping && !f.stmt.children.empty()) {
            f.node.children.push_back(std::move(f.stmt));
            f.stmt = CstNode{"stmt", {}};
        }
    };

    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        const Token& tok = seq.tokens[i];
        if (tok.category == TokenCategory::comment || is_structural(tok)) continue;

        const bool is_punct = tok.category == TokenCategory::punctuation;
        const char c = (is_punct && tok.text.size() == 1) ? tok.text[0] : 0;

        if (c == '(' || c == '[' || c == '{') {
            Frame f{CstNode{bracket_label(c), {}}, c == '{', CstNode{"stmt", {}}, c};
            f.node.children.push_back(make_leaf(tok));
            stack.push_back(std::move(f));
            continue;
        }
        if (c == ')' || c == ']' || c == '}') {
            if (stack.size() < 2) throw ParseError(i, "unbalanced closing bracket");
            Frame f = std::move(stack.back());
            stack.pop_back();
            if (closer_for(f.open_char) != c)
                throw ParseError(i, std::string("mismatched bracket: expected '") +
                                        closer_for(f.open_char) + "', got '" + c + "'");
            close_stmt(f);
            f.node.children.push_back(make_leaf(tok));
            sink().push_back(std::move(f.node));
            // A completed brace region terminates the enclosing statement.
            if (c == '}') close_stmt(stack.back());
            continue;
        }
        sink().push_back(make_leaf(tok));
        if (c == ';') close_stmt(stack.back());
    }

    if (stack.size() != 1) throw ParseError(seq.tokens.size(), "unbalanced opening bracket");
    close_stmt(stack.back());
    return CstTree{seq.file_id, std::move(stack.back().node)};
}

} // namespace

CstTree parse_structural(const TokenSeq& seq, Language language) {
    switch (language) {
    case Language::python: return parse_python(seq);
    case Language::java: return parse_java(seq);
    default: throw Error(Errc::unsupported_language, std::string(language_name(language)));
    }
}

// ---- s-expression interop --------------------------------------------------

namespace {

bool is_atom_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_atom_body(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

struct SexprParser {
    const std::string& text;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& reason) {
        throw Error(Errc::sexpr_syntax, "offset " + std::to_string(pos) + ": " + reason);
    }

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' ||
                                     text[pos] == '\r'))
            ++pos;
    }

    CstNode parse_node() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        if (text[pos] == '"') return parse_leaf();
        if (text[pos] != '(') fail("expected '(' or quoted leaf");
        ++pos;
        skip_ws();
        if (pos >= text.size() || !is_atom_start(text[pos])) fail("expected node label");
        std::size_t start = pos;
        while (pos < text.size() && is_atom_body(text[pos])) ++pos;
        CstNode node{text.substr(start, pos - start), {}};
        for (;;) {
            skip_ws();
            if (pos >= text.size()) fail("unterminated list");
            if (text[pos] == ')') {
                ++pos;
                return node;
            }
            node.children.push_back(parse_node());
        }
    }

    CstNode parse_leaf() {
        ++pos; // opening quote
        std::string label;
        for (;;) {
            if (pos >= text.size()) fail("unterminated leaf string");
            char c = text[pos];
            if (c == '"') {
                ++pos;
                return CstNode{std::move(label), {}};
            }
            if (c == '\\') {
                if (pos + 1 >= text.size()) fail("dangling escape");
                char e = text[pos + 1];
                if (e != '"' && e != '\\') fail("unsupported escape");
                label += e;
                pos += 2;
                continue;
            }
            label += c;
            ++pos;
        }
    }
};

void write_sexpr(const CstNode& node, std::string& out) {
    if (node.is_leaf()) {
        out += '"';
        for (char c : node.label) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        out += '"';
        return;
    }
    out += '(';
    out += node.label;
    for (const auto& child : node.children) {
        out += ' ';
        write_sexpr(child, out);
    }
    out += ')';
}

} // namespace

CstTree parse_tree_sexpr(const std::string& text, const std::string& file_id) {
    SexprParser p{text};
    p.skip_ws();
    if (p.pos >= text.size()) throw Error(Errc::empty_tree, "no tree in input");
    if (text[p.pos] == '"')
        throw Error(Errc::sexpr_syntax, "tree root must be an internal node");
    CstNode root = p.parse_node();
    p.skip_ws();
    if (p.pos < text.size())
        throw Error(Errc::sexpr_syntax, "trailing content after tree");
    return CstTree{file_id, std::move(root)};
}

CstTree load_external_tree(const std::filesystem::path& path, const std::string& file_id) {
    std::string id = file_id.empty() ? path.stem().string() : file_id;
    return parse_tree_sexpr(read_file(path), id);
}

std::string serialize_tree_sexpr(const CstTree& tree) {
    std::string out;
    if (tree.root.children.empty()) {
        // The root is always an internal node, even with nothing under it.
        out += '(';
        out += tree.root.label;
        out += ')';
    } else {
        write_sexpr(tree.root, out);
    }
    out += '\n';
    return out;
}

// ---- clusters and distance --------------------------------------------------

namespace {

// Canonical cluster encoding: sorted leaf labels, each length-prefixed.
// Injective, so comparing encodings compares clusters.
std::string encode_cluster(std::vector<std::string>& labels) {
    std::sort(labels.begin(), labels.end());
    std::string enc;
    for (const auto& l : labels) {
        enc += std::to_string(l.size());
        enc += ':';
        enc += l;
    }
    return enc;
}

// Returns the leaf labels under node; appends one encoded cluster per
// internal node visited.
std::vector<std::string> collect_clusters(const CstNode& node, std::vector<std::string>& out) {
    std::vector<std::string> labels;
    if (node.is_leaf()) {
        labels.push_back(node.label);
        return labels;
    }
    for (const auto& child : node.children) {
        auto sub = collect_clusters(child, out);
        labels.insert(labels.end(), std::make_move_iterator(sub.begin()),
                      std::make_move_iterator(sub.end()));
    }
    out.push_back(encode_cluster(labels));
    return labels;
}

} // namespace

ClusterMultiset cluster_multisets(const CstTree& t) {
    ClusterMultiset result;
    if (t.root.is_leaf()) return result; // root-only tree: no internal nodes
    collect_clusters(t.root, result.encoded);
    std::sort(result.encoded.begin(), result.encoded.end());
    return result;
}

RfDistance rf_distance(const ClusterMultiset& c1, const ClusterMultiset& c2) {
    std::unordered_map<std::string_view, std::int64_t> delta;
    delta.reserve(c1.size() + c2.size());
    for (const auto& e : c1.encoded) delta[e] += 1;
    for (const auto& e : c2.encoded) delta[e] -= 1;
    std::uint64_t raw = 0;
    for (const auto& [enc, d] : delta) raw += static_cast<std::uint64_t>(d < 0 ? -d : d);

    RfDistance r;
    r.raw = raw;
    const std::size_t total = c1.size() + c2.size();
    r.normalized = total == 0 ? 0.0 : static_cast<double>(raw) / static_cast<double>(total);
    return r;
}

RfDistance rf_distance(const CstTree& t1, const CstTree& t2) {
    return rf_distance(cluster_multisets(t1), cluster_multisets(t2));
}

DistanceMatrix distance_matrix(std::span<const CstTree> trees, const std::string& task_id,
                               unsigned jobs) {
    if (trees.size() < 2)
        throw Error(Errc::too_few_files, "task " + task_id + " has " +
                                             std::to_string(trees.size()) + " tree(s), need >= 2");
    const std::size_t n = trees.size();

    std::vector<ClusterMultiset> clusters(n);
    parallel_for(n, jobs, [&](std::size_t i) { clusters[i] = cluster_multisets(trees[i]); });

    DistanceMatrix m;
    m.task_id = task_id;
    m.file_ids.reserve(n);
    for (const auto& t : trees) m.file_ids.push_back(t.file_id);
    m.d.assign(n, std::vector<double>(n, 0.0));

    // Flattened upper triangle: pair k -> (i, j).
    const std::size_t pairs = n * (n - 1) / 2;
    parallel_for(pairs, jobs, [&](std::size_t k) {
        std::size_t i = 0;
        std::size_t remaining = k;
        std::size_t row_len = n - 1;
        while (remaining >= row_len) {
            remaining -= row_len;
            ++i;
            --row_len;
        }
        const std::size_t j = i + 1 + remaining;
        const double dist = rf_distance(clusters[i], clusters[j]).normalized;
        m.d[i][j] = dist;
        m.d[j][i] = dist;
    });

    m.avg.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += m.d[i][j];
        m.avg[i] = sum / static_cast<double>(n - 1);
    }
    return m;
}

// ---- matrix serialization ----------------------------------------------------

namespace {

std::string format_g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v == 0.0 ? 0.0 : v); // normalize -0
    return buf;
}

void append_json_string(std::string& out, const std::string& s) {
    out += json(s).dump();
}

} // namespace

std::string serialize_distance_matrix(const DistanceMatrix& m) {
    std::string out = "{\"task_id\": ";
    append_json_string(out, m.task_id);
    out += ", \"file_ids\": [";
    for (std::size_t i = 0; i < m.file_ids.size(); ++i) {
        if (i) out += ", ";
        append_json_string(out, m.file_ids[i]);
    }
    out += "], \"d\": [";
    for (std::size_t i = 0; i < m.d.size(); ++i) {
        if (i) out += ", ";
        out += '[';
        for (std::size_t j = 0; j < m.d[i].size(); ++j) {
            if (j) out += ", ";
            out += format_g9(m.d[i][j]);
        }
        out += ']';
    }
    out += "], \"avg\": [";
    for (std::size_t i = 0; i < m.avg.size(); ++i) {
        if (i) out += ", ";
        out += format_g9(m.avg[i]);
    }
    out += "]}\n";
    return out;
}

DistanceMatrix parse_distance_matrix(const std::string& json_text) {
    DistanceMatrix m;
    try {
        json obj = json::parse(json_text);
        m.task_id = obj.at("task_id").get<std::string>();
        m.file_ids = obj.at("file_ids").get<std::vector<std::string>>();
        m.d = obj.at("d").get<std::vector<std::vector<double>>>();
        m.avg = obj.at("avg").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(Errc::schema_error, std::string("distance matrix: ") + e.what());
    }
    if (m.d.size() != m.file_ids.size() || m.avg.size() != m.file_ids.size())
        throw Error(Errc::schema_error, "distance matrix: inconsistent dimensions");
    return m;
}

} // namespace codeshift
