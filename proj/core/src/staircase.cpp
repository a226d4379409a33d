#include "debtav/staircase.hpp"

#include <algorithm>
#include <string>

#include "debtav/errors.hpp"

namespace debtav {

namespace {

// Repayment per node in heap order (index 0 unused).
constexpr std::array<double, kStaircaseNodes + 1> kRepayment = {
    0.0,                                         //
    -100.0,                                      // level 1
    -90.0,  -110.0,                              // level 2
    -75.0,  -97.0,  -103.0, -125.0,              // level 3
    -60.0,  -85.0,  -95.0,  -99.0,  -101.0, -105.0, -115.0, -140.0};  // level 4

StaircaseStep child(int heap) {
  if (heap > kStaircaseNodes) return Switchpoint{heap - kStaircaseNodes};
  return NodeId{heap};
}

void check_node(NodeId id) {
  if (id.value < 1 || id.value > kStaircaseNodes) {
    throw ValidationError("staircase node id " + std::to_string(id.value) + " out of range");
  }
}

int level_of(int heap) {
  int level = 0;
  while (heap > 0) {
    heap >>= 1;
    ++level;
  }
  return level;
}

}  // namespace

NodeId staircase_root() { return NodeId{1}; }

StaircaseNode staircase_node(NodeId id) {
  check_node(id);
  return StaircaseNode{id,
                       level_of(id.value),
                       kStaircaseReceive,
                       kRepayment[static_cast<std::size_t>(id.value)],
                       child(2 * id.value + 1),
                       child(2 * id.value)};
}

StaircaseStep staircase_next(NodeId node, Answer answer) {
  const StaircaseNode n = staircase_node(node);
  return answer == Answer::accept ? n.accept_child : n.reject_child;
}

StaircaseStep staircase_next(const StaircaseStep& step, Answer answer) {
  if (const auto* node = std::get_if<NodeId>(&step)) return staircase_next(*node, answer);
  throw ValidationError("staircase already terminated at SP=" +
                        std::to_string(std::get<Switchpoint>(step).value));
}

Switchpoint staircase_switchpoint(std::span<const Answer> answers) {
  if (answers.size() != kStaircaseDepth) {
    throw ValidationError("staircase needs exactly 4 answers, got " +
                          std::to_string(answers.size()));
  }
  StaircaseStep step = staircase_root();
  for (Answer a : answers) step = staircase_next(step, a);
  return std::get<Switchpoint>(step);
}

std::array<Answer, kStaircaseDepth> staircase_answers(Switchpoint sp) {
  sp = make_switchpoint(sp.value);
  const int terminal = sp.value + kStaircaseNodes;  // heap index of the leaf
  std::array<Answer, kStaircaseDepth> out{};
  for (int level = kStaircaseDepth - 1; level >= 0; --level) {
    const int shift = kStaircaseDepth - 1 - level;
    out[static_cast<std::size_t>(level)] =
        ((terminal >> shift) & 1) ? Answer::accept : Answer::reject;
  }
  return out;
}

std::array<double, kStaircaseNodes> staircase_repayments_sorted() {
  std::array<double, kStaircaseNodes> out{};
  std::copy(kRepayment.begin() + 1, kRepayment.end(), out.begin());
  // Mildest contract first: smallest amount repaid.
  std::sort(out.begin(), out.end(), [](double a, double b) { return a > b; });
  return out;
}

Switchpoint make_switchpoint(int value) {
  if (value < 1 || value > kStaircaseSwitchpoints) {
    throw ValidationError("switchpoint must be in 1..16, got " + std::to_string(value));
  }
  return Switchpoint{value};
}

std::array<Answer, kStaircaseNodes> switchpoint_to_mpl_choices(Switchpoint sp) {
  sp = make_switchpoint(sp.value);
  std::array<Answer, kStaircaseNodes> out{};
  for (int i = 0; i < kStaircaseNodes; ++i) {
    out[static_cast<std::size_t>(i)] = i < sp.value - 1 ? Answer::accept : Answer::reject;
  }
  return out;
}

Switchpoint replay_staircase(const std::array<Answer, kStaircaseNodes>& sorted_choices) {
  const auto repayments = staircase_repayments_sorted();
  StaircaseStep step = staircase_root();
  while (const auto* node = std::get_if<NodeId>(&step)) {
    const double repay = staircase_node(*node).repay_in_6m;
    const auto pos = std::find(repayments.begin(), repayments.end(), repay) - repayments.begin();
    step = staircase_next(*node, sorted_choices[static_cast<std::size_t>(pos)]);
  }
  return std::get<Switchpoint>(step);
}

MPLSpec staircase_mpl() {
  MPLSpec spec;
  spec.id = "staircase";
  spec.description =
      "Hypothetical debt contracts: receive 100 today, repay in 6 months; A = decline, "
      "B = accept; rows ordered from the mildest repayment";
  for (double repay : staircase_repayments_sorted()) {
    const PaymentStream decline{0.0, 0.0, 0.0, kStaircaseHorizon};
    const PaymentStream accept{kStaircaseReceive, repay, 0.0, kStaircaseHorizon};
    spec.rows.push_back({Prospect::certain(decline), Prospect::certain(accept),
                         "repay " + std::to_string(static_cast<int>(-repay))});
  }
  return spec;
}

nlohmann::json staircase_to_json() {
  using nlohmann::json;
  auto step_json = [](const StaircaseStep& s) {
    if (const auto* n = std::get_if<NodeId>(&s)) return json{{"node", n->value}};
    return json{{"switchpoint", std::get<Switchpoint>(s).value}};
  };
  json nodes = json::array();
  for (int i = 1; i <= kStaircaseNodes; ++i) {
    const StaircaseNode n = staircase_node(NodeId{i});
    nodes.push_back(json{{"id", i},
                         {"level", n.level},
                         {"receive_today", n.receive_today},
                         {"repay_in_6m", n.repay_in_6m},
                         {"accept", step_json(n.accept_child)},
                         {"reject", step_json(n.reject_child)}});
  }
  json terminals = json::array();
  for (int sp = 1; sp <= kStaircaseSwitchpoints; ++sp) {
    json path = json::array();
    for (Answer a : staircase_answers(Switchpoint{sp})) path.push_back(to_string(a));
    terminals.push_back(json{{"switchpoint", sp}, {"path", path}});
  }
  return json{{"schema_version", 1},
              {"root", 1},
              {"horizon_months", kStaircaseHorizon},
              {"question", "Contract: receive 100 today, repay XX in 6 months. Accept?"},
              {"nodes", nodes},
              {"terminals", terminals}};
}

Answer parse_answer(const std::string& text) {
  if (text == "accept" || text == "a" || text == "yes" || text == "1") return Answer::accept;
  if (text == "reject" || text == "r" || text == "no" || text == "0") return Answer::reject;
  throw ValidationError("answer must be accept or reject, got '" + text + "'");
}

std::string to_string(Answer a) { return a == Answer::accept ? "accept" : "reject"; }

}  // namespace debtav
