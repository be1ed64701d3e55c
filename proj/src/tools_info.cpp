#include "gm/tools.hpp"
#include "gm/util.hpp"

#include <algorithm>

namespace gm::tools {

using nlohmann::json;

json bundle_to_json(const InfoBundle& b) {
  json bullets = json::array();
  for (const auto& p : b.bullet_points)
    bullets.push_back({{"icon_keyword", p.icon_keyword}, {"headline", p.headline}, {"content", p.content}});
  return json{{"title", b.title}, {"bullet_points", std::move(bullets)}};
}

namespace {

const json* field(const json& obj, std::initializer_list<const char*> names) {
  for (const char* n : names)
    if (auto it = obj.find(n); it != obj.end()) return &*it;
  return nullptr;
}

std::string required_text(const json& obj, std::initializer_list<const char*> names, const std::string& path) {
  const json* v = field(obj, names);
  if (!v) throw SchemaError(path, "missing");
  if (!v->is_string()) throw SchemaError(path, "wrong-type");
  std::string s = trim(v->get<std::string>());
  if (s.empty()) throw SchemaError(path, "empty");
  return s;
}

}  // namespace

InfoBundle bundle_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("$", "wrong-type");
  InfoBundle b;
  b.title = required_text(j, {"title"}, "title");
  const json* bullets = field(j, {"bullet_points", "bullet points"});
  if (!bullets) throw SchemaError("bullet_points", "missing");
  if (!bullets->is_array()) throw SchemaError("bullet_points", "wrong-type");
  if (bullets->empty()) throw SchemaError("bullet_points", "empty");
  for (std::size_t i = 0; i < bullets->size(); ++i) {
    const json& e = (*bullets)[i];
    const std::string path = "bullet_points[" + std::to_string(i) + "]";
    if (!e.is_object()) throw SchemaError(path, "wrong-type");
    b.bullet_points.push_back(BulletPoint{required_text(e, {"icon_keyword", "icon keyword"}, path + ".icon_keyword"),
                                          required_text(e, {"headline"}, path + ".headline"),
                                          required_text(e, {"content"}, path + ".content")});
  }
  return b;
}

InfoBundle parse_bundle_text(std::string_view text) {
  std::string body = trim(text);
  // tolerate a fenced block around the JSON
  if (body.rfind("```", 0) == 0) {
    auto nl = body.find('\n');
    auto end = body.rfind("```");
    if (nl != std::string::npos && end != std::string::npos && end > nl) body = trim(body.substr(nl + 1, end - nl - 1));
  }
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("invalid-json: ") + e.what());
  }
  return bundle_from_json(j);
}

// ---------------------------------------------------------------------------

namespace {

struct Fixture {
  std::string title;
  std::vector<BulletPoint> bullets;
};

const std::vector<std::pair<std::string, Fixture>>& fixtures() {
  static const std::vector<std::pair<std::string, Fixture>> table = [] {
    const Fixture ancient{
        "Ancient Civilizations",
        {{"pyramid", "Ancient Egypt", "Pharaohs raised monumental pyramids along the Nile and recorded their world in hieroglyphs."},
         {"scroll", "Mesopotamia", "Between the Tigris and Euphrates, Sumerians built the first cities and invented cuneiform writing."},
         {"temple", "Ancient Greece", "Greek city-states such as Athens gave rise to democracy, philosophy and theatre."},
         {"crown", "Roman Empire", "Rome's roads, laws and aqueducts bound a vast empire around the Mediterranean."},
         {"book", "Indus Valley", "Planned cities like Mohenjo-daro had grid streets and advanced drainage systems."}}};
    const Fixture climate{
        "Climate Change",
        {{"thermometer", "Rising Temperatures", "Average global temperature has climbed about 1.1 degrees Celsius since pre-industrial times."},
         {"iceberg", "Melting Ice", "Polar ice sheets and glaciers are shrinking, threatening habitats such as the polar bear's."},
         {"factory", "Greenhouse Gases", "Burning fossil fuels releases carbon dioxide that traps heat in the atmosphere."},
         {"recycle", "What We Can Do", "Saving energy, recycling and choosing clean transport all cut emissions."},
         {"tree", "Forests Matter", "Forests absorb carbon dioxide; protecting them slows warming."}}};
    const Fixture space{
        "Space Exploration",
        {{"rocket", "Leaving Earth", "Rockets overcome gravity to carry satellites, probes and people into orbit."},
         {"moon", "Lunar Missions", "Twelve astronauts walked on the Moon between 1969 and 1972."},
         {"planet", "Robotic Explorers", "Rovers and probes have visited every planet in the solar system."},
         {"star", "Beyond the Sun", "Space telescopes now study planets orbiting distant stars."}}};
    const Fixture ocean{
        "Ocean Life",
        {{"fish", "Biodiversity", "Oceans are home to hundreds of thousands of known species."},
         {"wave", "Currents", "Ocean currents move heat around the planet and shape the climate."},
         {"water", "Plastic Pollution", "Millions of tonnes of plastic reach the sea every year."},
         {"shield", "Marine Reserves", "Protected areas let fish populations and coral reefs recover."}}};
    const Fixture tech{
        "Artificial Intelligence",
        {{"chip", "Learning From Data", "Machine learning systems find patterns in large datasets."},
         {"computer", "Everyday Uses", "Recommendation, translation and speech recognition rely on AI."},
         {"lightbulb", "New Ideas", "AI tools help people brainstorm, draft and design."},
         {"lock", "Responsible Use", "Privacy, fairness and safety guide how AI should be deployed."}}};
    const Fixture health{
        "Healthy Eating",
        {{"apple", "Fruit and Vegetables", "Aim for a colourful variety of produce every day."},
         {"water", "Stay Hydrated", "Water is the best drink for most people most of the time."},
         {"heart", "Heart Health", "Whole grains and less salt support a healthy heart."},
         {"clock", "Regular Meals", "Eating at regular times helps keep energy steady."}}};
    const Fixture pets{
        "Pets at Home",
        {{"dog", "Dogs", "Dogs are loyal companions that need daily walks and play."},
         {"cat", "Cats", "Cats are independent, curious and sleep up to sixteen hours a day."},
         {"bird", "Birds", "Parrots and budgies can learn to mimic words and sounds."},
         {"fish", "Fish", "An aquarium needs clean, well-filtered water."}}};
    return std::vector<std::pair<std::string, Fixture>>{
        {"ancient civilizations", ancient}, {"ancient civilization", ancient}, {"ancient egypt", ancient},
        {"climate change", climate},        {"global warming", climate},      {"climate", climate},
        {"polar bear", climate},            {"space exploration", space},     {"space", space},
        {"ocean", ocean},                   {"marine", ocean},                {"artificial intelligence", tech},
        {"technology", tech},               {"healthy eating", health},       {"nutrition", health},
        {"pets", pets},                     {"animals", pets}};
  }();
  return table;
}

const std::vector<BulletPoint>& generic_bullets() {
  static const std::vector<BulletPoint> g{
      {"lightbulb", "Key Idea", "The central idea in one sentence."},
      {"chart", "By the Numbers", "A figure that shows the scale of the topic."},
      {"globe", "Why It Matters", "How the topic affects people around the world."},
      {"book", "Background", "A short history of how it came about."},
      {"star", "Fun Fact", "Something surprising worth remembering."},
      {"people", "Who Is Involved", "The people and groups shaping it."},
      {"clock", "Timeline", "The milestones that mark its progress."},
      {"flag", "Looking Ahead", "What to expect next."}};
  return g;
}

std::string title_case(const std::string& s) {
  std::string out = trim(s);
  bool start = true;
  for (char& c : out) {
    if (start && std::isalpha(static_cast<unsigned char>(c))) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    start = c == ' ';
  }
  return out;
}

}  // namespace

InfoBundle StubInfoSource::collect(const std::string& topic, int bullet_count) {
  const std::string lower = to_lower(topic);
  const Fixture* best = nullptr;
  std::size_t best_len = 0;
  for (const auto& [key, fx] : fixtures()) {
    if (key.size() > best_len && lower.find(key) != std::string::npos) {
      best = &fx;
      best_len = key.size();
    }
  }
  InfoBundle b;
  b.title = best ? best->title : title_case(topic);
  if (best) b.bullet_points = best->bullets;
  for (const auto& g : generic_bullets()) {
    if (static_cast<int>(b.bullet_points.size()) >= bullet_count) break;
    if (std::none_of(b.bullet_points.begin(), b.bullet_points.end(),
                     [&](const BulletPoint& p) { return p.headline == g.headline; }))
      b.bullet_points.push_back(g);
  }
  if (static_cast<int>(b.bullet_points.size()) > bullet_count) b.bullet_points.resize(static_cast<std::size_t>(bullet_count));
  return b;
}

InfoBundle ModelInfoSource::collect(const std::string& topic, int bullet_count) {
  std::vector<PromptTurn> prompt{
      {"system",
       "You collect information for an infographic. Reply with one JSON object only. It has two keys: "
       "\"title\" (the infographic title) and \"bullet points\" (an array). Every bullet point is an object "
       "with three keys: \"icon keyword\" (one or two words used to search for an icon), \"headline\" (a "
       "short highlight) and \"content\" (one or two sentences of detail matching the headline)."},
      {"user", "Topic: " + topic + "\nNumber of bullet points: " + std::to_string(bullet_count)}};
  std::string answer = model_->complete(prompt);
  try {
    return parse_bundle_text(answer);
  } catch (const SchemaError& e) {
    prompt.push_back({"assistant", answer});
    prompt.push_back({"user", std::string("That reply is invalid (") + e.what() +
                                  "). Reply again with the JSON object only."});
  }
  answer = model_->complete(prompt);
  return parse_bundle_text(answer);
}

InfoBundle collect_information(const std::string& topic, int bullet_count_hint, InfoSource& source) {
  if (trim(topic).empty()) throw Error("InvalidRequest", "topic is empty");
  if (bullet_count_hint < 1 || bullet_count_hint > 8)
    throw Error("InvalidRequest", "bullet count must be between 1 and 8");
  InfoBundle b = source.collect(trim(topic), bullet_count_hint);
  return bundle_from_json(bundle_to_json(b));  // re-validate whatever the source produced
}

json collected_to_json(const CollectedInfo& c) {
  json j = bundle_to_json(c.bundle);
  json icons = json::object();
  for (const auto& [kw, icon] : c.icons) icons[kw] = {{"svg", icon.svg}, {"source", to_string(icon.source)}};
  j["icons"] = std::move(icons);
  return j;
}

CollectedInfo collected_from_json(const json& j) {
  CollectedInfo c;
  c.bundle = bundle_from_json(j);
  if (j.contains("icons")) {
    for (const auto& [kw, v] : j["icons"].items()) {
      IconResult r;
      r.keyword = kw;
      r.svg = v.at("svg").get<std::string>();
      const auto src = v.value("source", std::string("placeholder"));
      r.source = src == "remote" ? IconSource::remote : src == "local" ? IconSource::local : IconSource::placeholder;
      c.icons.emplace(kw, std::move(r));
    }
  }
  return c;
}

}  // namespace gm::tools
