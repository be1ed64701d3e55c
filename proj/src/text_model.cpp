#include "gm/text_model.hpp"

#include "gm/model.hpp"

namespace gm {

std::string ScriptedTextModel::complete(const std::vector<PromptTurn>& prompt) {
  prompts_.push_back(prompt);
  if (answers_.empty()) throw Error("ScriptExhausted", "scripted text model has no answers left");
  std::string a = std::move(answers_.front());
  answers_.pop_front();
  return a;
}

}  // namespace gm
