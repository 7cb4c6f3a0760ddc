#pragma once

#include <functional>
#include <stdexcept>
#include <string_view>

#include "gcn/corpus.hpp"

// Test-set taint checks. Every entry point that hands a corpus to the generator, the
// curriculum or a learner reports the corpus split here; test-tagged data is refused
// everywhere except the final learner's evaluation.
namespace gcn::hygiene {

enum class Component { Generator, Curriculum, Learner, LearnerEvaluation, FinalLearnerEvaluation };

std::string_view to_string(Component component);

class TestSetLeak : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Throws TestSetLeak when `split` is Test and `component` is not FinalLearnerEvaluation.
void check_access(Component component, SplitTag split);

using Observer = std::function<void(Component, SplitTag)>;

// Installs an observer for the lifetime of the guard (used by the taint audit tests).
class ScopedObserver {
 public:
  explicit ScopedObserver(Observer observer);
  ~ScopedObserver();
  ScopedObserver(const ScopedObserver&) = delete;
  ScopedObserver& operator=(const ScopedObserver&) = delete;

 private:
  Observer previous_;
};

}  // namespace gcn::hygiene
