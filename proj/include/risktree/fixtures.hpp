#pragma once

#include "risktree/space.hpp"

#include <string>
#include <vector>

namespace risktree::fixtures {

// Two terminal states u/dn, one period, uniform P and mu.
template <class S>
space::ScenarioSpace<S> two_state_T1() {
    using space::ScenarioSpace;
    S half = Num<S>::from_ratio(1, 2);
    return ScenarioSpace<S>(
        1, {"u", "dn"}, {{{0, 1}}, {{0}, {1}}}, {half, half});
}

// Recombining-free binary tree over two periods, four terminal states.
template <class S>
space::ScenarioSpace<S> binary_T2() {
    using space::ScenarioSpace;
    S q = Num<S>::from_ratio(1, 4);
    return ScenarioSpace<S>(
        2, {"uu", "ud", "du", "dd"},
        {{{0, 1, 2, 3}}, {{0, 1}, {2, 3}}, {{0}, {1}, {2}, {3}}},
        {q, q, q, q});
}

// Three-period binary tree with eight terminal states and a tilted P.
template <class S>
space::ScenarioSpace<S> tree_T3() {
    using space::ScenarioSpace;
    Vec<S> prob;
    // weights 1..8 over 36, full support and non-uniform
    for (int k = 1; k <= 8; ++k) prob.push_back(Num<S>::from_ratio(k, 36));
    std::vector<std::vector<std::vector<int>>> parts = {
        {{0, 1, 2, 3, 4, 5, 6, 7}},
        {{0, 1, 2, 3}, {4, 5, 6, 7}},
        {{0, 1}, {2, 3}, {4, 5}, {6, 7}},
        {{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}}};
    std::vector<std::string> names;
    for (int k = 0; k < 8; ++k) names.push_back("w" + std::to_string(k));
    return ScenarioSpace<S>(3, names, parts, prob);
}

}  // namespace risktree::fixtures
