// Scores one hard-coded model response against a ground-truth answer.

#include <iostream>

#include "cost/cost.hpp"

int main() {
  const auto& lex = cost::Lexicon::builtin();

  const cost::ObjectCountMap gt{{"person", 2}, {"car", 1}, {"sky", 1}};
  const std::string answer = cost::render_answer(gt, lex);
  const std::string response =
      "Sure! The objects present in the image are: three women, a car, a handbag.";

  const auto pred = cost::parse_object_counts(response, lex);
  std::cout << "ground truth: " << answer << '\n';
  std::cout << "response:     " << response << '\n';
  std::cout << "CS = " << cost::count_score(gt, pred) << '\n';
  std::cout << "HS = " << cost::hallucination_score(gt, pred) << '\n';

  const cost::DepthOrder gt_order = cost::DepthOrder::from_labels({"person", "person-2", "car"});
  const auto pred_order = cost::parse_depth_order(
      "The depth order for objects present in the image is: person, car, person-2.", lex);
  std::cout << "DS = " << cost::depth_score(gt_order, pred_order) << '\n';
}
