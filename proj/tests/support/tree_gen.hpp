#pragma once

// Random rooted trees with small label alphabets for property tests.

#include <string>
#include <vector>

#include "codeshift/cst.hpp"
#include "codeshift/rng.hpp"

namespace codeshift::testgen {

// Random tree with at most max_leaves leaves; labels drawn from a small
// alphabet so duplicate leaf labels are common.
inline CstNode random_node(Rng& rng, int depth, std::size_t& leaf_budget,
                           const std::vector<std::string>& alphabet) {
    const bool leaf = depth >= 3 || leaf_budget <= 1 || rng.bounded(3) == 0;
    if (leaf) {
        leaf_budget -= 1;
        return CstNode{alphabet[rng.bounded(alphabet.size())], {}};
    }
    CstNode node{depth == 0 ? "root" : (rng.bounded(2) ? "stmt" : "block"), {}};
    const std::size_t n_children = 1 + rng.bounded(3);
    for (std::size_t i = 0; i < n_children && leaf_budget > 0; ++i)
        node.children.push_back(random_node(rng, depth + 1, leaf_budget, alphabet));
    return node;
}

inline CstTree random_tree(Rng& rng, std::size_t max_leaves,
                           const std::vector<std::string>& alphabet,
                           const std::string& file_id) {
    std::size_t budget = 1 + rng.bounded(max_leaves);
    CstNode root{"root", {}};
    while (budget > 0) {
        std::size_t before = budget;
        root.children.push_back(random_node(rng, 1, budget, alphabet));
        if (budget == before) break;
    }
    return CstTree{file_id, std::move(root)};
}

} // namespace codeshift::testgen
