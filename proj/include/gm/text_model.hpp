#pragma once

#include <deque>
#include <string>
#include <vector>

namespace gm {

struct PromptTurn {
  std::string role;  // system | user | assistant
  std::string text;
};

/// Plain text completion, used by tools that prompt a model directly.
class TextModel {
 public:
  virtual ~TextModel() = default;
  virtual std::string complete(const std::vector<PromptTurn>& prompt) = 0;
};

/// Returns canned answers in order; throws gm::Error("ScriptExhausted") after.
class ScriptedTextModel final : public TextModel {
 public:
  explicit ScriptedTextModel(std::vector<std::string> answers)
      : answers_(answers.begin(), answers.end()) {}

  std::string complete(const std::vector<PromptTurn>& prompt) override;

  const std::vector<std::vector<PromptTurn>>& prompts() const { return prompts_; }

 private:
  std::deque<std::string> answers_;
  std::vector<std::vector<PromptTurn>> prompts_;
};

}  // namespace gm
