#include "gm/tools.hpp"
#include "gm/util.hpp"

#include <cmath>

namespace gm::tools {

using agent::ArgMap;
using agent::ParamSpec;
using agent::ToolContext;
using agent::ToolSignature;
using agent::ValueType;
using nlohmann::json;

std::vector<ToolSignature> builtin_signatures() {
  const ParamSpec style{"style", ValueType::enumeration, false,
                        "Rendering style of the picture.", {"watercolor", "3d_render"}, style_names()};
  const ParamSpec effect{"effect", ValueType::enumeration, false,
                         "Optional photographic effect.", {"focused", "blur"}, effect_names()};
  const ParamSpec seed{"seed", ValueType::number, false,
                       "Random seed; the same seed and caption reproduce the same picture.", {7}, {}};
  return {
      ToolSignature{
          "pivot_figure",
          "Create the pivot figure: one central object or character, with its accompanying details, that "
          "anchors the infographic. Use it when the user wants a main picture, illustration or figure. When "
          "the user gives no subject, infer one from the conversation topic.",
          {ParamSpec{"caption", ValueType::string, true,
                     "The central object and its attributes, written as a short noun phrase.",
                     {"a smiling dog wearing a hat", "a cute cat", "a crying polar bear"}, {}},
           style, effect, seed}},
      ToolSignature{
          "background_figure",
          "Create the background image: a descriptive environment or scene placed behind every other "
          "element. Use it when the user asks for a background, backdrop or setting.",
          {ParamSpec{"caption", ValueType::string, true,
                     "The scene or environment, written as a short noun phrase.",
                     {"the park under warm sunlight", "the melting iceberg"}, {}},
           style, effect, seed}},
      ToolSignature{
          "collect_information",
          "Gather the text of the infographic: a title plus bullet points, each with an icon keyword, a "
          "headline and content. Icons for the keywords are fetched at the same time. Use it when the user "
          "names a topic to explain.",
          {ParamSpec{"topic", ValueType::string, true, "Overall subject matter of the infographic.",
                     {"Ancient Civilizations", "climate change"}, {}},
           ParamSpec{"bullet_count", ValueType::number, false, "How many bullet points to produce (1 to 8).",
                     {3, 4}, {}}}},
      ToolSignature{
          "search_icons",
          "Find SVG icons for a keyword. Use it when the user asks for an icon or symbol.",
          {ParamSpec{"keyword", ValueType::string, true, "A word or short phrase describing the icon.",
                     {"pyramid", "polar bear"}, {}},
           ParamSpec{"limit", ValueType::number, false, "Maximum number of icons (1 to 20).", {3}, {}}}},
      ToolSignature{
          "generate_layout",
          "Design a layout for the infographic from a natural-language directive. Use it when the user asks "
          "for a layout, arrangement or structure.",
          {ParamSpec{"instruction", ValueType::string, true, "The layout directive.",
                     {"Generate a waved layout", "three rows with a picture on the right"}, {}}}},
      ToolSignature{
          "edit_image",
          "Edit an existing generated image with a natural-language instruction instead of recreating it.",
          {ParamSpec{"resource_id", ValueType::string, true, "Id of the image resource to edit.", {"r0002"}, {}},
           ParamSpec{"instruction", ValueType::string, true, "What to change.",
                     {"make it snowy", "turn it into watercolor", "grayscale"}, {}}}},
  };
}

namespace {

int int_arg(const ArgMap& args, const std::string& name, int fallback) {
  auto v = agent::number_arg(args, name);
  return v ? static_cast<int>(std::lround(*v)) : fallback;
}

ImageRequest image_request(const ArgMap& args, ImageKind kind, const ToolContext& ctx) {
  ImageRequest req;
  req.caption = trim(agent::string_arg(args, "caption"));
  req.kind = kind;
  req.style = image_style_from(agent::string_arg(args, "style", "none"));
  req.effect = image_effect_from(agent::string_arg(args, "effect", "none"));
  auto seed = agent::number_arg(args, "seed");
  req.seed = seed ? static_cast<std::uint64_t>(std::llround(std::fabs(*seed))) : ctx.seed;
  return req;
}

}  // namespace

void register_builtin_tools(agent::ToolRegistry& registry, Toolkit kit) {
  auto sigs = builtin_signatures();
  auto sig = [&](const std::string& name) {
    for (auto& s : sigs)
      if (s.name == name) return s;
    throw Error("InvalidSignature", "no built-in signature " + name);
  };

  registry.register_tool(sig("pivot_figure"), [images = kit.images](const ArgMap& args, const ToolContext& ctx) {
    return generate_image(image_request(args, ImageKind::pivot, ctx), ctx.canvas, *images);
  });

  registry.register_tool(sig("background_figure"), [images = kit.images](const ArgMap& args, const ToolContext& ctx) {
    return generate_image(image_request(args, ImageKind::background, ctx), ctx.canvas, *images);
  });

  registry.register_tool(sig("collect_information"), [info = kit.info, icons = kit.icons](const ArgMap& args,
                                                                                          const ToolContext&) {
    CollectedInfo collected;
    const std::string topic = agent::string_arg(args, "topic");
    collected.bundle = collect_information(topic, int_arg(args, "bullet_count", 3), *info);
    for (const auto& p : collected.bundle.bullet_points) {
      if (collected.icons.count(p.icon_keyword)) continue;
      collected.icons.emplace(p.icon_keyword, search_icons(p.icon_keyword, 1, *icons).front());
    }
    DesignResource r;
    r.task = DesignTask::information_collection;
    r.media = MediaKind::text_bundle;
    r.label = collected.bundle.title;
    r.content = collected_to_json(collected).dump();
    return r;
  });

  registry.register_tool(sig("search_icons"), [icons = kit.icons](const ArgMap& args, const ToolContext&) {
    const std::string keyword = agent::string_arg(args, "keyword");
    auto hits = search_icons(keyword, int_arg(args, "limit", 1), *icons);
    DesignResource r;
    r.task = DesignTask::visual_element;
    r.media = MediaKind::svg;
    r.label = trim(keyword);
    r.content = hits.front().svg;
    if (hits.front().source == IconSource::placeholder) r.warning = "no icon found; using a placeholder glyph";
    return r;
  });

  registry.register_tool(sig("generate_layout"), [model = kit.layouts](const ArgMap& args, const ToolContext&) {
    const std::string instruction = agent::string_arg(args, "instruction");
    auto tree = generate_layout(instruction, *model);
    DesignResource r;
    r.task = DesignTask::layout;
    r.media = MediaKind::layout_dsl;
    r.label = trim(instruction);
    r.content = layout::serialize_layout(tree);
    return r;
  });

  registry.register_tool(sig("edit_image"), [editor = kit.editor](const ArgMap& args, const ToolContext& ctx) {
    const std::string id = agent::string_arg(args, "resource_id");
    const DesignResource* src = ctx.conversation.find_resource(id);
    if (!src) throw Error("UnknownResource", "no resource " + id + " in this conversation");
    if (src->media != MediaKind::png || src->data.empty())
      throw Error("InvalidResource", "resource " + id + " is not an image");
    DesignResource r = edit_image(src->data, agent::string_arg(args, "instruction"), editor.get());
    r.task = src->task;
    return r;
  });
}

}  // namespace gm::tools
