#include "gcn/hygiene.hpp"

#include <mutex>
#include <string>

namespace gcn::hygiene {
namespace {

std::mutex& observer_mutex() {
  static std::mutex m;
  return m;
}

Observer& current_observer() {
  static Observer observer;
  return observer;
}

}  // namespace

std::string_view to_string(Component component) {
  switch (component) {
    case Component::Generator:
      return "generator";
    case Component::Curriculum:
      return "curriculum";
    case Component::Learner:
      return "learner";
    case Component::LearnerEvaluation:
      return "learner_evaluation";
    case Component::FinalLearnerEvaluation:
      return "final_learner_evaluation";
  }
  return "unknown";
}

void check_access(Component component, SplitTag split) {
  {
    std::lock_guard lock(observer_mutex());
    if (current_observer()) current_observer()(component, split);
  }
  if (split == SplitTag::Test && component != Component::FinalLearnerEvaluation) {
    throw TestSetLeak("test-tagged data reached the " + std::string(to_string(component)));
  }
}

ScopedObserver::ScopedObserver(Observer observer) {
  std::lock_guard lock(observer_mutex());
  previous_ = std::move(current_observer());
  current_observer() = std::move(observer);
}

ScopedObserver::~ScopedObserver() {
  std::lock_guard lock(observer_mutex());
  current_observer() = std::move(previous_);
}

}  // namespace gcn::hygiene
