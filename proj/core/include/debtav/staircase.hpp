#pragma once

// Adaptive staircase over 15 hypothetical debt contracts: receive 100 today,
// repay an amount in six months. Four accept/reject answers locate one of 16
// switchpoints.

#include <array>
#include <span>
#include <variant>

#include <nlohmann/json.hpp>

#include "debtav/choice_data.hpp"

namespace debtav {

enum class Answer { reject = 0, accept = 1 };

struct NodeId {
  int value = 1;  ///< heap order: root 1, children of i are 2i (reject) and 2i+1 (accept)
  friend bool operator==(NodeId, NodeId) = default;
};

struct Switchpoint {
  int value = 1;  ///< 1..16
  friend bool operator==(Switchpoint, Switchpoint) = default;
  friend auto operator<=>(Switchpoint, Switchpoint) = default;
};

using StaircaseStep = std::variant<NodeId, Switchpoint>;

struct StaircaseNode {
  NodeId id;
  int level = 1;  ///< 1..4
  double receive_today = 100.0;
  double repay_in_6m = -100.0;
  StaircaseStep accept_child;
  StaircaseStep reject_child;
};

inline constexpr int kStaircaseDepth = 4;
inline constexpr int kStaircaseNodes = 15;
inline constexpr int kStaircaseSwitchpoints = 16;
inline constexpr double kStaircaseReceive = 100.0;
inline constexpr double kStaircaseHorizon = 6.0;  ///< months

NodeId staircase_root();
/// Throws ValidationError for ids outside 1..15.
StaircaseNode staircase_node(NodeId id);
StaircaseStep staircase_next(NodeId node, Answer answer);
/// Throws ValidationError when `step` is already a switchpoint.
StaircaseStep staircase_next(const StaircaseStep& step, Answer answer);

/// Throws ValidationError unless exactly four answers are given.
Switchpoint staircase_switchpoint(std::span<const Answer> answers);
std::array<Answer, kStaircaseDepth> staircase_answers(Switchpoint sp);

/// Repayments (negative) of the 15 contracts, mildest first.
std::array<double, kStaircaseNodes> staircase_repayments_sorted();

/// Monotone accept/reject vector over the sorted contracts implied by a
/// switchpoint: the first sp-1 contracts are accepted.
std::array<Answer, kStaircaseNodes> switchpoint_to_mpl_choices(Switchpoint sp);
Switchpoint make_switchpoint(int value);

/// Runs the staircase against a full 15-decision vector and returns the SP reached.
Switchpoint replay_staircase(const std::array<Answer, kStaircaseNodes>& sorted_choices);

/// The 15 contracts as an MPL: option A declines (nothing), option B accepts.
MPLSpec staircase_mpl();

nlohmann::json staircase_to_json();

Answer parse_answer(const std::string& text);
std::string to_string(Answer a);

}  // namespace debtav
