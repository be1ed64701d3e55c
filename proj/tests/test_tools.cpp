#include "gm/image.hpp"
#include "gm/tools.hpp"
#include "gm/util.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <random>

namespace gm::tools {
namespace {

using nlohmann::json;

std::vector<std::uint8_t> solid_png(int w, int h, Rgb c) {
  Image img(w, h);
  fill_rect(img, 0, 0, w, h, c);
  return encode_png(img);
}

// ---------------------------------------------------------------------------
// images

TEST(Prompt, Templates) {
  EXPECT_EQ(assemble_prompt({"a cute cat", ImageKind::pivot, ImageStyle::none, ImageEffect::none, 0}),
            "a focused image of a cute cat");
  EXPECT_EQ(assemble_prompt({"the park under warm sunlight", ImageKind::background, ImageStyle::none,
                             ImageEffect::none, 0}),
            "a background of the park under warm sunlight");
  EXPECT_EQ(assemble_prompt({"a cute cat", ImageKind::pivot, ImageStyle::render_3d, ImageEffect::blur, 0}),
            "a focused image of a cute cat, 3d_render, blur");
  EXPECT_EQ(assemble_prompt({"x", ImageKind::background, ImageStyle::none, ImageEffect::focused, 0}),
            "a background of x, focused");
}

TEST(Prompt, AlwaysStartsWithOneTemplate) {
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    ImageRequest r{"caption " + std::to_string(i), static_cast<ImageKind>(rng() % 2),
                   static_cast<ImageStyle>(rng() % 5), static_cast<ImageEffect>(rng() % 3), rng()};
    const auto p = assemble_prompt(r);
    const bool pivot = p.rfind(kPivotTemplate, 0) == 0;
    const bool bg = p.rfind(kBackgroundTemplate, 0) == 0;
    ASSERT_NE(pivot, bg) << p;
  }
}

TEST(Prompt, EnumNames) {
  EXPECT_EQ(style_names(), (std::vector<std::string>{"watercolor", "3d_render", "flat", "photo", "none"}));
  EXPECT_EQ(effect_names(), (std::vector<std::string>{"blur", "focused", "none"}));
  EXPECT_THROW(image_style_from("oilpaint"), Error);
}

TEST(Images, SizesFollowKind) {
  EXPECT_EQ(image_size(ImageKind::pivot, {1280, 720, "#FFFFFF"}), std::make_pair(1024, 1024));
  EXPECT_EQ(image_size(ImageKind::background, {1280, 720, "#FFFFFF"}), std::make_pair(1024, 576));
  EXPECT_EQ(image_size(ImageKind::background, {600, 800, "#FFFFFF"}), std::make_pair(1024, 1365));
}

TEST(Images, StubIsPureFunctionOfPromptAndSeed) {
  StubImageBackend stub;
  const auto a = stub.txt2img("a focused image of a cute cat", 128, 96, 7);
  const auto b = stub.txt2img("a focused image of a cute cat", 128, 96, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, stub.txt2img("a focused image of a cute cat", 128, 96, 8));
  EXPECT_NE(a, stub.txt2img("a focused image of a cute dog", 128, 96, 7));
  const Image img = decode_png(a);
  EXPECT_EQ(img.width, 128);
  EXPECT_EQ(img.height, 96);
}

TEST(Images, GenerateImageResource) {
  StubImageBackend stub;
  const auto r = generate_image({"a cute cat", ImageKind::pivot, ImageStyle::none, ImageEffect::none, 7},
                                CanvasSpec{}, stub);
  EXPECT_EQ(r.task, DesignTask::pivot_figure);
  EXPECT_EQ(r.media, MediaKind::png);
  EXPECT_EQ(r.label, "a cute cat");
  const Image img = decode_png(r.data);
  EXPECT_EQ(img.width, 1024);
  EXPECT_EQ(img.height, 1024);
  const auto bg = generate_image({"x", ImageKind::background, ImageStyle::none, ImageEffect::none, 0},
                                 CanvasSpec{1280, 720, "#FFFFFF"}, stub);
  EXPECT_EQ(bg.task, DesignTask::background);
  EXPECT_EQ(decode_png(bg.data).height, 576);
  EXPECT_THROW(generate_image({" ", ImageKind::pivot, ImageStyle::none, ImageEffect::none, 0}, {}, stub), Error);
}

TEST(Images, RemoteBackendProtocol) {
  test::MockServer mock;
  json seen;
  const auto png = solid_png(4, 3, {10, 20, 30});
  mock.http.Post("/sd/txt2img", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    res.set_content(json{{"png_base64", base64_encode(png)}}.dump(), "application/json");
  });
  const auto base = mock.start();
  RemoteImageBackend remote(make_http_client(), base + "/sd/");
  EXPECT_EQ(remote.txt2img("a focused image of a cute cat", 1024, 1024, 9), png);
  EXPECT_EQ(seen, (json{{"prompt", "a focused image of a cute cat"},
                        {"width", 1024},
                        {"height", 1024},
                        {"steps", 50},
                        {"seed", 9}}));
}

TEST(Images, RemoteFailuresFallBackToStub) {
  test::MockServer mock;
  std::atomic<int> calls{0};
  mock.http.Post("/txt2img", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    if (req.body.find("garbage") != std::string::npos)
      res.set_content(R"({"png_base64":"bm90IGEgcG5n"})", "application/json");
    else
      res.status = 503;
  });
  const auto base = mock.start();
  auto remote = std::make_shared<RemoteImageBackend>(make_http_client(), base);
  EXPECT_THROW(remote->txt2img("p", 8, 8, 0), BackendUnavailable);
  EXPECT_THROW(remote->txt2img("garbage", 8, 8, 0), BackendUnavailable);

  auto stub = std::make_shared<StubImageBackend>();
  FallbackImageBackend fb(remote, stub);
  EXPECT_EQ(fb.txt2img("p", 8, 8, 0), stub->txt2img("p", 8, 8, 0));
  EXPECT_EQ(calls.load(), 3);

  RemoteImageBackend unreachable(make_http_client({std::chrono::seconds(2), 1}), "http://127.0.0.1:1");
  EXPECT_THROW(unreachable.txt2img("p", 8, 8, 0), BackendUnavailable);
}

// ---------------------------------------------------------------------------
// information collection

TEST(Info, StubAncientCivilizations) {
  StubInfoSource stub;
  const auto b = collect_information("Ancient Civilizations", 3, stub);
  EXPECT_EQ(b.title, "Ancient Civilizations");
  ASSERT_EQ(b.bullet_points.size(), 3u);
  for (const auto& p : b.bullet_points) {
    EXPECT_FALSE(p.icon_keyword.empty());
    EXPECT_FALSE(p.headline.empty());
    EXPECT_FALSE(p.content.empty());
  }
  EXPECT_EQ(b.bullet_points[0].icon_keyword, "pyramid");
}

TEST(Info, StubIsDeterministicAndPadsUnknownTopics) {
  StubInfoSource stub;
  EXPECT_EQ(collect_information("climate change", 4, stub), collect_information("climate change", 4, stub));
  const auto b = collect_information("volcanoes", 8, stub);
  EXPECT_EQ(b.title, "Volcanoes");
  EXPECT_EQ(b.bullet_points.size(), 8u);
  EXPECT_EQ(collect_information("space exploration", 7, stub).bullet_points.size(), 7u);
}

TEST(Info, RequestChecks) {
  StubInfoSource stub;
  EXPECT_THROW(collect_information(" ", 3, stub), Error);
  EXPECT_THROW(collect_information("x", 0, stub), Error);
  EXPECT_THROW(collect_information("x", 9, stub), Error);
}

TEST(Info, SchemaParsing) {
  const auto b = parse_bundle_text(
      "```json\n{\"title\":\"T\",\"bullet points\":[{\"icon keyword\":\"dog\",\"headline\":\"H\",\"content\":\"C\"}]}\n```");
  EXPECT_EQ(b, (InfoBundle{"T", {{"dog", "H", "C"}}}));
  EXPECT_EQ(bundle_from_json(bundle_to_json(b)), b);

  auto reason = [](const std::string& text) {
    try {
      parse_bundle_text(text);
    } catch (const SchemaError& e) {
      return e.path() + ":" + e.reason();
    }
    return std::string("ok");
  };
  EXPECT_EQ(reason(R"({"title":"T"})"), "bullet_points:missing");
  EXPECT_EQ(reason(R"({"bullet_points":[]})"), "title:missing");
  EXPECT_EQ(reason(R"({"title":"T","bullet_points":[]})"), "bullet_points:empty");
  EXPECT_EQ(reason(R"({"title":"T","bullet_points":{}})"), "bullet_points:wrong-type");
  EXPECT_EQ(reason(R"({"title":"T","bullet_points":[{"headline":"H","content":"C"}]})"),
            "bullet_points[0].icon_keyword:missing");
  EXPECT_EQ(reason(R"({"title":" ","bullet_points":[{"icon_keyword":"a","headline":"H","content":"C"}]})"),
            "title:empty");
  EXPECT_EQ(reason("[1,2]"), "$:wrong-type");
  EXPECT_EQ(reason("{not json").substr(0, 15), "$:invalid-json:");
}

TEST(Info, ModelRepairRetry) {
  auto model = std::make_shared<ScriptedTextModel>(std::vector<std::string>{
      R"({"title":"Space"})",
      R"({"title":"Space","bullet points":[{"icon keyword":"rocket","headline":"Launch","content":"Up."}]})"});
  ModelInfoSource src(model);
  const auto b = collect_information("space", 1, src);
  EXPECT_EQ(b.title, "Space");
  ASSERT_EQ(model->prompts().size(), 2u);
  const auto& retry = model->prompts()[1];
  EXPECT_EQ(retry.size(), 4u);
  EXPECT_NE(retry.back().text.find("bullet_points: missing"), std::string::npos) << retry.back().text;
  EXPECT_NE(model->prompts()[0][0].text.find("\"icon keyword\""), std::string::npos);
}

TEST(Info, ModelFailsAfterOneRetry) {
  auto model = std::make_shared<ScriptedTextModel>(std::vector<std::string>{R"({"title":"A"})", R"({"title":"B"})",
                                                                            "never asked"});
  ModelInfoSource src(model);
  try {
    collect_information("space", 3, src);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "bullet_points");
    EXPECT_EQ(e.reason(), "missing");
  }
  EXPECT_EQ(model->prompts().size(), 2u);
}

// ---------------------------------------------------------------------------
// icons

TEST(Icons, RemoteSearchUsesIconifyProtocol) {
  test::MockServer mock;
  std::string query;
  mock.http.Get("/search", [&](const httplib::Request& req, httplib::Response& res) {
    query = req.get_param_value("query") + "|" + req.get_param_value("limit");
    res.set_content(R"({"icons":["mdi:pyramid","game-icons:pyramids"],"total":2})", "application/json");
  });
  mock.http.Get("/:prefix/:name", [](const httplib::Request& req, httplib::Response& res) {
    res.set_content("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 24 24\"><title>" +
                        req.path_params.at("prefix") + "</title></svg>",
                    "image/svg+xml");
  });
  const auto base = mock.start();
  IconSearch client(make_http_client(), base);
  const auto hits = search_icons("pyramid", 5, client);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(query, "pyramid|5");
  for (const auto& h : hits) {
    EXPECT_EQ(h.source, IconSource::remote);
    EXPECT_TRUE(is_valid_svg(h.svg));
  }
  EXPECT_NE(hits[1].svg.find("game-icons"), std::string::npos);
}

TEST(Icons, FallbackChain) {
  IconSearch offline;
  const auto dog = search_icons("dog", 3, offline);
  ASSERT_EQ(dog.size(), 1u);
  EXPECT_EQ(dog[0].source, IconSource::local);
  EXPECT_TRUE(is_valid_svg(dog[0].svg));

  const auto unknown = search_icons("zyzzyva", 3, offline);
  ASSERT_EQ(unknown.size(), 1u);
  EXPECT_EQ(unknown[0].source, IconSource::placeholder);
  EXPECT_EQ(unknown[0].svg, placeholder_icon());
  EXPECT_NE(unknown[0].svg.find("<circle"), std::string::npos);

  EXPECT_TRUE(local_icon("Pyramids"));
  EXPECT_EQ(local_icon("polar bear"), local_icon("bear"));

  // an unreachable or failing remote drops through to the local bundle
  test::MockServer mock;
  mock.http.Get("/search", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  const auto base = mock.start();
  IconSearch failing(make_http_client(), base);
  EXPECT_EQ(search_icons("dog", 2, failing)[0].source, IconSource::local);
  EXPECT_THROW(search_icons("", 2, failing), Error);
  EXPECT_THROW(search_icons("dog", 21, failing), Error);
}

TEST(Icons, BundleIsWellFormed) {
  EXPECT_GE(local_icon_bundle().size(), 40u);
  for (const auto& [kw, svg] : local_icon_bundle()) EXPECT_TRUE(is_valid_svg(svg)) << kw;
  EXPECT_TRUE(is_valid_svg(placeholder_icon()));
}

// ---------------------------------------------------------------------------
// layouts

TEST(Layouts, ScriptedAnswerIsParsed) {
  const std::string waved = layout_templates().at("waved");
  ScriptedTextModel model({waved});
  const auto tree = generate_layout("Generate a waved layout", model);
  EXPECT_EQ(layout::serialize_layout(tree), waved);
  ASSERT_EQ(model.prompts().size(), 1u);
  EXPECT_EQ(model.prompts()[0][0].text, layout::grammar_document());
  EXPECT_EQ(model.prompts()[0][1].text, "Generate a waved layout");
}

TEST(Layouts, RetryOnSyntaxError) {
  ScriptedTextModel model({"(C,0,0,1,1", "```\n(C,0,0,1,1,[(G,0,0,1,0.2,[(title,0,0,1,1)])])\n```"});
  const auto tree = generate_layout("a title band", model);
  EXPECT_EQ(layout::serialize_layout(tree), "(C,0,0,1,1,[(G,0,0,1,0.2,[(title,0,0,1,1)])])");
  ASSERT_EQ(model.prompts().size(), 2u);
  EXPECT_NE(model.prompts()[1].back().text.find("SyntaxError"), std::string::npos);
}

TEST(Layouts, FailsAfterRetryWithReport) {
  const std::string two_titles = "(C,0,0,1,1,[(G,0,0,1,1,[(title,0,0,1,0.5),(title,0,0.5,1,0.5)])])";
  ScriptedTextModel model({two_titles, two_titles, two_titles});
  try {
    generate_layout("two titles", model);
    FAIL();
  } catch (const LayoutGenerationError& e) {
    EXPECT_NE(e.last_report().find("TITLE_MULTIPLICITY"), std::string::npos);
  }
  EXPECT_EQ(model.prompts().size(), 2u);
}

TEST(Layouts, TemplateModelPicksByKeyword) {
  TemplateLayoutModel model;
  const auto rows = generate_layout("three rows with a picture", model);
  EXPECT_EQ(layout::serialize_layout(rows), layout_templates().at("three_rows"));
  EXPECT_EQ(layout::serialize_layout(generate_layout("Generate a waved layout", model)),
            layout_templates().at("waved"));
  EXPECT_EQ(layout::serialize_layout(generate_layout("three columns", model)), layout_templates().at("three_columns"));
  const auto slots = layout::container_slots(rows);
  int bullets = 0;
  for (const auto& s : slots) bullets += s.size() == 3;
  EXPECT_EQ(bullets, 3);
  for (const auto& [name, text] : layout_templates()) {
    const auto t = layout::parse_layout(text);
    EXPECT_TRUE(layout::validate_layout(t).ok) << name;
    EXPECT_EQ(layout::serialize_layout(t), text) << name;
  }
}

// ---------------------------------------------------------------------------
// editing and clipping

TEST(Edit, StubGrayscaleMakesChannelsEqual) {
  std::mt19937_64 rng(8);
  const auto src = encode_png(test::random_image(rng, 40));
  const auto r = edit_image(src, "grayscale", nullptr);
  EXPECT_TRUE(r.warning.empty());
  const Image out = decode_png(r.data);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      const auto* p = out.px(x, y);
      ASSERT_TRUE(p[0] == p[1] && p[1] == p[2]);
    }
}

TEST(Edit, StubInvertAndBlur) {
  const Image img = decode_png(solid_png(5, 5, {10, 200, 30}));
  const Image inv = decode_png(edit_image(encode_png(img), "please invert it", nullptr).data);
  EXPECT_EQ(inv.px(2, 2)[0], 245);
  EXPECT_EQ(inv.px(2, 2)[1], 55);
  // a flat image is a fixed point of the box blur
  EXPECT_EQ(decode_png(edit_image(encode_png(img), "blur", nullptr).data), img);
}

TEST(Edit, StubUnknownInstructionReturnsInput) {
  const auto src = solid_png(6, 4, {1, 2, 3});
  const auto r = edit_image(src, "make it snowy", nullptr);
  EXPECT_EQ(r.data, src);
  EXPECT_FALSE(r.warning.empty());
  EXPECT_THROW(edit_image(src, " ", nullptr), Error);
  EXPECT_THROW(edit_image(std::vector<std::uint8_t>{1, 2, 3}, "grayscale", nullptr), Error);
}

TEST(Edit, RemoteBytesReturnedVerbatim) {
  test::MockServer mock;
  const auto reply = solid_png(3, 3, {250, 250, 250});
  json seen;
  mock.http.Post("/edit", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    res.set_content(json{{"png_base64", base64_encode(reply)}}.dump(), "application/json");
  });
  const auto base = mock.start();
  RemoteEditBackend remote(make_http_client(), base);
  const auto src = solid_png(3, 3, {0, 0, 0});
  const auto r = edit_image(src, "make it snowy", &remote);
  EXPECT_EQ(r.data, reply);
  EXPECT_EQ(seen["instruction"], "make it snowy");
  EXPECT_EQ(base64_decode(seen["png_base64"].get<std::string>()), src);
}

TEST(Clip, RectangleMatchesCropOracle) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    const Image img = test::random_image(rng);
    std::uniform_int_distribution<int> xs(0, img.width - 1), ys(0, img.height - 1);
    const int x = xs(rng), y = ys(rng);
    const int w = std::uniform_int_distribution<int>(1, img.width - x)(rng);
    const int h = std::uniform_int_distribution<int>(1, img.height - y)(rng);
    const auto r = clip_image(encode_png(img), RectSelector{{double(x), double(y), double(w), double(h)}}, nullptr);
    EXPECT_EQ(r.task, DesignTask::local_adjustment);
    ASSERT_EQ(decode_png(r.data), test::crop_oracle(img, x, y, w, h)) << i;
  }
}

TEST(Clip, LeftHalfAndIdentity) {
  Image img(20, 10);
  for (std::size_t k = 0; k < img.rgba.size(); ++k) img.rgba[k] = static_cast<std::uint8_t>(k * 7);
  const auto png = encode_png(img);
  EXPECT_EQ(decode_png(clip_image(png, RectSelector{{0, 0, 10, 10}}, nullptr).data),
            test::crop_oracle(img, 0, 0, 10, 10));
  EXPECT_EQ(decode_png(clip_image(png, RectSelector{{0, 0, 20, 10}}, nullptr).data), img);
  EXPECT_THROW(clip_image(png, RectSelector{{15, 0, 10, 10}}, nullptr), Error);
  EXPECT_THROW(clip_image(png, RectSelector{{0, 0, 0, 10}}, nullptr), Error);
}

class FakeSegmenter : public SegmentationBackend {
 public:
  std::vector<std::uint8_t> segment(std::span<const std::uint8_t> png, const Selector&) override {
    ++calls;
    return std::vector<std::uint8_t>(png.begin(), png.end());
  }
  int calls = 0;
};

TEST(Clip, PointAndLineNeedSegmentation) {
  const auto png = solid_png(10, 10, {1, 1, 1});
  try {
    clip_image(png, PointSelector{5, 5}, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "SegmentationUnavailable");
  }
  EXPECT_THROW(clip_image(png, LineSelector{0, 0, 9, 9}, nullptr), SegmentationUnavailable);
  FakeSegmenter seg;
  EXPECT_EQ(clip_image(png, PointSelector{5, 5}, &seg).data, png);
  EXPECT_EQ(clip_image(png, LineSelector{0, 0, 9, 9}, &seg).data, png);
  EXPECT_EQ(seg.calls, 2);
  EXPECT_THROW(clip_image(png, PointSelector{50, 5}, &seg), Error);
}

// ---------------------------------------------------------------------------
// registry wiring

TEST(Builtins, CollectInformationBundlesIcons) {
  agent::ToolRegistry r;
  register_builtin_tools(r, Toolkit{});
  Conversation c;
  const agent::ToolContext ctx{c, CanvasSpec{}, 0};
  const auto res = r.find("collect_information")->executor({{"topic", "Ancient Civilizations"}, {"bullet_count", 3}},
                                                           ctx);
  EXPECT_EQ(res.task, DesignTask::information_collection);
  const auto collected = collected_from_json(json::parse(res.content));
  EXPECT_EQ(collected.bundle.bullet_points.size(), 3u);
  for (const auto& p : collected.bundle.bullet_points) {
    ASSERT_TRUE(collected.icons.count(p.icon_keyword));
    EXPECT_TRUE(is_valid_svg(collected.icons.at(p.icon_keyword).svg));
  }
  EXPECT_EQ(collected_to_json(collected), json::parse(res.content));
}

TEST(Builtins, EveryToolRoundTripsOffline) {
  agent::ToolRegistry r;
  register_builtin_tools(r, Toolkit{});
  Conversation c;
  DesignResource src = generate_image({"a cute cat", ImageKind::pivot, ImageStyle::none, ImageEffect::none, 0}, {},
                                      *std::make_shared<StubImageBackend>());
  src.resource_id = "r0001";
  c.append({Role::tool, "", {src}});
  const agent::ToolContext ctx{c, CanvasSpec{}, 3};
  const std::vector<std::pair<std::string, agent::ArgMap>> calls{
      {"pivot_figure", {{"caption", "a cute cat"}, {"style", "watercolor"}}},
      {"background_figure", {{"caption", "the melting iceberg"}}},
      {"search_icons", {{"keyword", "zyzzyva"}}},
      {"generate_layout", {{"instruction", "Generate a waved layout"}}},
      {"edit_image", {{"resource_id", "r0001"}, {"instruction", "grayscale"}}},
  };
  for (const auto& [name, args] : calls) {
    const auto res = r.find(name)->executor(args, ctx);
    EXPECT_NO_THROW(check_pairing(res)) << name;
    if (res.media == MediaKind::png) {
      EXPECT_NO_THROW(decode_png(res.data)) << name;
    }
    if (res.media == MediaKind::svg) {
      EXPECT_TRUE(is_valid_svg(res.content)) << name;
    }
    if (res.media == MediaKind::layout_dsl) {
      EXPECT_TRUE(layout::validate_layout(layout::parse_layout(res.content)).ok);
    }
  }
  EXPECT_FALSE(r.find("search_icons")->executor({{"keyword", "zyzzyva"}}, ctx).warning.empty());
  EXPECT_THROW(r.find("edit_image")->executor({{"resource_id", "r0099"}, {"instruction", "grayscale"}}, ctx), Error);
}

}  // namespace
}  // namespace gm::tools
