#include <doctest.h>

#include "codeshift/cst.hpp"
#include "codeshift/error.hpp"
#include "support/oracles.hpp"
#include "support/tmpdir.hpp"
#include "support/tree_gen.hpp"

using namespace codeshift;

namespace {

CstNode leaf(const std::string& l) { return CstNode{l, {}}; }
CstNode node(const std::string& l, std::vector<CstNode> children) {
    return CstNode{l, std::move(children)};
}

CstTree python_tree(const std::string& src, const std::string& id = "f") {
    TokenSeq seq{id, tokenize(src, Language::python)};
    return parse_structural(seq, Language::python);
}

CstTree java_tree(const std::string& src, const std::string& id = "f") {
    TokenSeq seq{id, tokenize(src, Language::java)};
    return parse_structural(seq, Language::java);
}

} // namespace

TEST_CASE("empty sequence parses to a bare root") {
    auto t = parse_structural(TokenSeq{"f", {}}, Language::python);
    CHECK(t.root.label == "root");
    CHECK(t.root.children.empty());
    CHECK(t.leaf_labels().empty());
}

TEST_CASE("python 'x = 1' parses to root/stmt/leaves") {
    auto t = python_tree("x = 1");
    REQUIRE(t.root.children.size() == 1);
    const auto& stmt = t.root.children[0];
    CHECK(stmt.label == "stmt");
    CHECK(stmt.children == std::vector<CstNode>{leaf("x"), leaf("="), leaf("1")});
}

TEST_CASE("java 'f(a,b)' parses to root/stmt with a paren region") {
    auto t = java_tree("f(a,b)");
    REQUIRE(t.root.children.size() == 1);
    const auto& stmt = t.root.children[0];
    REQUIRE(stmt.children.size() == 2);
    CHECK(stmt.children[0] == leaf("f"));
    const auto& paren = stmt.children[1];
    CHECK(paren.label == "paren");
    CHECK(paren.children ==
          std::vector<CstNode>{leaf("("), leaf("a"), leaf(","), leaf("b"), leaf(")")});
}

TEST_CASE("python blocks attach to their header statement") {
    auto t = python_tree("if a:\n    b = 1\n");
    REQUIRE(t.root.children.size() == 1);
    const auto& header = t.root.children[0];
    REQUIRE(header.children.size() == 4); // if a : block
    CHECK(header.children[3].label == "block");
    CHECK(t.leaf_labels() == std::vector<std::string>{"if", "a", ":", "b", "=", "1"});
}

TEST_CASE("leaf traversal reproduces the non-structural token text order") {
    const std::string src = "def f(x):\n    y = x + 1  # inc\n    return y\n";
    TokenSeq seq{"f", tokenize(src, Language::python)};
    auto t = parse_structural(seq, Language::python);
    std::vector<std::string> expected;
    for (const auto& tok : seq.tokens) {
        if (tok.category == TokenCategory::comment || tok.text.empty()) continue;
        expected.push_back(tok.text);
    }
    CHECK(t.leaf_labels() == expected);
}

TEST_CASE("java statement grouping splits on semicolons and brace regions") {
    auto t = java_tree("int x = 1; int y = 2;");
    CHECK(t.root.children.size() == 2);

    auto t2 = java_tree("class A { int f() { return 1; } }");
    REQUIRE(t2.root.children.size() == 1); // one top-level stmt: class A {...}
}

TEST_CASE("java unbalanced brackets raise ParseError") {
    CHECK_THROWS_AS(java_tree("f(a"), ParseError);
    CHECK_THROWS_AS(java_tree("f a)"), ParseError);
    CHECK_THROWS_AS(java_tree("f(a]"), ParseError);
}

TEST_CASE("python stray dedent raises ParseError") {
    TokenSeq seq{"f", {Token{TokenCategory::dedent, ""}}};
    CHECK_THROWS_WITH_AS(parse_structural(seq, Language::python),
                         doctest::Contains("dedent"), ParseError);
}

// ---- s-expressions -----------------------------------------------------------

TEST_CASE("s-expression parse of trivial and nested trees") {
    auto t = parse_tree_sexpr("(root)", "f");
    CHECK(t.root.label == "root");
    CHECK(t.root.children.empty());

    auto t2 = parse_tree_sexpr("(root (stmt \"x\" \"=\" \"1\"))", "f");
    CHECK(t2 == python_tree("x = 1"));
}

TEST_CASE("s-expression escapes") {
    CstTree t{"f", node("root", {node("stmt", {leaf("\"quoted\""), leaf("back\\slash")})})};
    auto text = serialize_tree_sexpr(t);
    CHECK(parse_tree_sexpr(text, "f") == t);
}

TEST_CASE("s-expression round-trip of parsed source") {
    auto t = python_tree("for i in r:\n    s += i\n");
    CHECK(parse_tree_sexpr(serialize_tree_sexpr(t), "f") == t);

    auto tj = java_tree("while (x > 0) { x--; }");
    CHECK(parse_tree_sexpr(serialize_tree_sexpr(tj), "f") == tj);
}

TEST_CASE("s-expression error cases") {
    CHECK_THROWS_AS(parse_tree_sexpr("", "f"), Error);                // EmptyTree
    CHECK_THROWS_AS(parse_tree_sexpr("(root", "f"), Error);          // unterminated
    CHECK_THROWS_AS(parse_tree_sexpr("(root))", "f"), Error);        // trailing
    CHECK_THROWS_AS(parse_tree_sexpr("\"leaf\"", "f"), Error);       // bare leaf root
    CHECK_THROWS_AS(parse_tree_sexpr("(1bad)", "f"), Error);         // bad label
}

TEST_CASE("load_external_tree defaults file_id to the filename stem") {
    testgen::TmpDir dir("cst_load");
    auto p = dir.write("tree-7.sexp", "(root (stmt \"a\"))\n");
    auto t = load_external_tree(p);
    CHECK(t.file_id == "tree-7");
    CHECK(t.leaf_labels() == std::vector<std::string>{"a"});
}

// ---- clusters ------------------------------------------------------------------

TEST_CASE("cluster multisets of the spec trees") {
    // root(f(a,b), c): clusters {a,b,c} and {a,b}.
    CstTree t{"t", node("root", {node("stmt", {leaf("a"), leaf("b")}), leaf("c")})};
    auto cm = cluster_multisets(t);
    CHECK(cm.size() == 2);

    CstTree root_only{"t", node("root", {})};
    CHECK(cluster_multisets(root_only).size() == 0);
}

TEST_CASE("rf distance of the spec example pair is 2/4") {
    CstTree t1{"a", node("root", {node("stmt", {leaf("a"), leaf("b")}), leaf("c")})};
    CstTree t2{"b", node("root", {node("stmt", {leaf("a"), leaf("c")}), leaf("b")})};
    auto d = rf_distance(t1, t2);
    CHECK(d.raw == 2);
    CHECK(d.normalized == 0.5);
}

TEST_CASE("rf distance of identical trees is zero") {
    auto t = python_tree("def f():\n    return 1\n");
    auto d = rf_distance(t, t);
    CHECK(d.raw == 0);
    CHECK(d.normalized == 0.0);
}

TEST_CASE("disjoint leaf alphabets give normalized distance 1") {
    Rng rng(7);
    for (int it = 0; it < 50; ++it) {
        auto t1 = testgen::random_tree(rng, 8, {"a", "b", "c"}, "t1");
        auto t2 = testgen::random_tree(rng, 8, {"x", "y"}, "t2");
        auto d = rf_distance(t1, t2);
        auto [raw, norm] = oracle::rf_pairs(t1, t2);
        CHECK(d.raw == raw);
        CHECK(d.normalized == 1.0);
        CHECK(d.raw == cluster_multisets(t1).size() + cluster_multisets(t2).size());
    }
}

TEST_CASE("rf distance matches the brute-force oracle on random tree pairs") {
    Rng rng(12345);
    const std::vector<std::string> alphabet{"a", "b", "c", "x"};
    for (int it = 0; it < 500; ++it) {
        auto t1 = testgen::random_tree(rng, 8, alphabet, "t1");
        auto t2 = testgen::random_tree(rng, 8, alphabet, "t2");
        auto fast = rf_distance(t1, t2);
        auto [raw, norm] = oracle::rf_pairs(t1, t2);
        CHECK(fast.raw == raw);
        CHECK(fast.normalized == norm);
        // Symmetry and identity.
        auto rev = rf_distance(t2, t1);
        CHECK(rev.raw == fast.raw);
        CHECK(rf_distance(t1, t1).raw == 0);
    }
}

// ---- distance matrix -------------------------------------------------------------

TEST_CASE("distance matrix of two identical trees is all zeros") {
    auto t1 = python_tree("x = 1", "f1");
    auto t2 = python_tree("x = 1", "f2");
    std::vector<CstTree> trees{t1, t2};
    auto m = distance_matrix(trees, "t");
    CHECK(m.d == std::vector<std::vector<double>>{{0.0, 0.0}, {0.0, 0.0}});
    CHECK(m.avg == std::vector<double>{0.0, 0.0});
}

TEST_CASE("distance matrix spec example: one outlier tree") {
    CstTree t1{"f1", node("root", {node("stmt", {leaf("a"), leaf("b")})})};
    CstTree t2{"f2", node("root", {node("stmt", {leaf("a"), leaf("b")})})};
    CstTree t3{"f3", node("root", {node("stmt", {leaf("x"), leaf("y")})})};
    std::vector<CstTree> trees{t1, t2, t3};
    auto m = distance_matrix(trees, "t");
    CHECK(m.avg[0] == 0.5);
    CHECK(m.avg[1] == 0.5);
    CHECK(m.avg[2] == 1.0);
}

TEST_CASE("distance matrix is symmetric and job-count independent") {
    Rng rng(99);
    std::vector<CstTree> trees;
    for (int k = 0; k < 12; ++k)
        trees.push_back(testgen::random_tree(rng, 10, {"a", "b", "c", "d"},
                                             "f" + std::to_string(k)));
    auto m1 = distance_matrix(trees, "t", 1);
    auto m8 = distance_matrix(trees, "t", 8);
    CHECK(m1 == m8);
    for (std::size_t i = 0; i < m1.d.size(); ++i)
        for (std::size_t j = 0; j < m1.d.size(); ++j) CHECK(m1.d[i][j] == m1.d[j][i]);
}

TEST_CASE("distance matrix rejects fewer than two trees") {
    std::vector<CstTree> one{python_tree("x = 1")};
    CHECK_THROWS_WITH_AS(distance_matrix(one, "t"), doctest::Contains("TooFewFiles"), Error);
}

TEST_CASE("distance matrix serialization round-trip uses 9 significant digits") {
    // d(t1,t2) = 4/6: the {a,b} cluster matches, the singletons and roots do not.
    CstTree t1{"f1", node("root", {node("stmt", {leaf("a"), leaf("b")}),
                                   node("stmt", {leaf("c")})})};
    CstTree t2{"f2", node("root", {node("stmt", {leaf("a"), leaf("b")}),
                                   node("stmt", {leaf("d")})})};
    std::vector<CstTree> trees{t1, t2};
    auto m = distance_matrix(trees, "t");
    CHECK(m.d[0][1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    auto text = serialize_distance_matrix(m);
    auto m2 = parse_distance_matrix(text);
    CHECK(m2.task_id == m.task_id);
    CHECK(m2.file_ids == m.file_ids);
    for (std::size_t i = 0; i < m.d.size(); ++i)
        for (std::size_t j = 0; j < m.d.size(); ++j)
            CHECK(m2.d[i][j] == doctest::Approx(m.d[i][j]).epsilon(1e-9));
    CHECK(text.find("0.666666667") != std::string::npos);
}
