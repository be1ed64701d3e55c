#include "gm/tools.hpp"
#include "gm/util.hpp"

namespace gm::tools {

namespace {

// bullet containers: icon beside the text (row) or above it (column)
const std::string kRowBullet = "(icon,0.02,0.1,0.15,0.8),(headline,0.2,0.05,0.78,0.3),(content,0.2,0.4,0.78,0.55)";
const std::string kColumnBullet = "(icon,0.35,0.02,0.3,0.25),(headline,0.05,0.3,0.9,0.15),(content,0.05,0.48,0.9,0.5)";
const std::string kTitleBand = "(G,0,0,1,0.18,[(title,0.05,0.1,0.9,0.8)])";

std::string g(const std::string& rect, const std::string& slots) { return "(G," + rect + ",[" + slots + "])"; }

std::map<std::string, std::string> build_templates() {
  std::map<std::string, std::string> t;
  t["three_rows"] = "(C,0,0,1,1,[" + kTitleBand + ",(C,0,0.18,0.6,0.82,[" + g("0,0,1,0.3333", kRowBullet) + "," +
                    g("0,0.3333,1,0.3333", kRowBullet) + "," + g("0,0.6667,1,0.3333", kRowBullet) + "])," +
                    g("0.6,0.18,0.4,0.82", "(image,0.05,0.05,0.9,0.9)") + "])";
  t["three_columns"] = "(C,0,0,1,1,[" + kTitleBand + "," + g("0,0.18,1,0.32", "(image,0.3,0.05,0.4,0.9)") +
                       ",(C,0,0.5,1,0.5,[" + g("0,0,0.3333,1", kColumnBullet) + "," +
                       g("0.3333,0,0.3333,1", kColumnBullet) + "," + g("0.6667,0,0.3333,1", kColumnBullet) + "])])";
  t["waved"] = "(C,0,0,1,1,[" + kTitleBand + ",(C,0,0.18,1,0.82,[" + g("0.02,0.2,0.3,0.4", kColumnBullet) + "," +
               g("0.35,0.4,0.3,0.4", kColumnBullet) + "," + g("0.68,0.2,0.3,0.4", kColumnBullet) + "," +
               g("0.35,0,0.3,0.38", "(image,0.05,0.05,0.9,0.9)") + "])])";
  t["grid"] = "(C,0,0,1,1,[" + kTitleBand + ",(C,0,0.18,0.65,0.82,[" + g("0,0,0.5,0.5", kColumnBullet) + "," +
              g("0.5,0,0.5,0.5", kColumnBullet) + "," + g("0,0.5,0.5,0.5", kColumnBullet) + "," +
              g("0.5,0.5,0.5,0.5", kColumnBullet) + "])," + g("0.65,0.18,0.35,0.82", "(image,0.05,0.05,0.9,0.9)") +
              "])";
  t["poster"] = "(C,0,0,1,1,[" + kTitleBand + "," + g("0.1,0.2,0.8,0.78", "(image,0,0,1,1)") + "])";
  return t;
}

std::string strip_fences(std::string text) {
  text = trim(text);
  if (text.rfind("```", 0) == 0) {
    const auto nl = text.find('\n');
    const auto end = text.rfind("```");
    if (nl != std::string::npos && end != std::string::npos && end > nl) text = trim(text.substr(nl + 1, end - nl - 1));
  }
  return text;
}

}  // namespace

const std::map<std::string, std::string>& layout_templates() {
  static const auto t = build_templates();
  return t;
}

std::string TemplateLayoutModel::complete(const std::vector<PromptTurn>& prompt) {
  std::string ask;
  for (auto it = prompt.rbegin(); it != prompt.rend(); ++it)
    if (it->role == "user") {
      ask = to_lower(it->text);
      break;
    }
  const auto& t = layout_templates();
  if (ask.find("wave") != std::string::npos) return t.at("waved");
  if (ask.find("column") != std::string::npos) return t.at("three_columns");
  if (ask.find("grid") != std::string::npos || ask.find("four") != std::string::npos) return t.at("grid");
  if (ask.find("poster") != std::string::npos) return t.at("poster");
  return t.at("three_rows");
}

layout::LayoutTree generate_layout(const std::string& instruction, TextModel& model) {
  if (trim(instruction).empty()) throw Error("InvalidRequest", "layout instruction is empty");
  std::vector<PromptTurn> prompt{{"system", std::string(layout::grammar_document())}, {"user", instruction}};
  std::string report;
  for (int attempt = 1; attempt <= 2; ++attempt) {
    const std::string answer = strip_fences(model.complete(prompt));
    try {
      auto tree = layout::parse_layout(answer);
      const auto check = layout::validate_layout(tree);
      if (check.ok) return tree;
      report = check.to_text();
    } catch (const Error& e) {
      report = std::string(e.code()) + ": " + e.what();
    }
    prompt.push_back({"assistant", answer});
    prompt.push_back({"user", "That layout was rejected:\n" + report + "Return a corrected layout string only."});
  }
  throw LayoutGenerationError("no valid layout after retry", report);
}

}  // namespace gm::tools
