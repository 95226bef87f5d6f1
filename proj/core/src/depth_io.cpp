#include "depthtrack/depth_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "io_util.hpp"

namespace depthtrack {

namespace {

struct PnmHeader {
  std::string magic;
  long width = 0;
  long height = 0;
  long maxval = 0;
  size_t data_offset = 0;
};

PnmHeader parse_pnm_header(const std::vector<char>& bytes,
                           const std::filesystem::path& path) {
  size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
    std::string tok;
    while (pos < bytes.size() &&
           !std::isspace(static_cast<unsigned char>(bytes[pos])) &&
           bytes[pos] != '#') {
      tok += bytes[pos];
      ++pos;
    }
    return tok;
  };

  PnmHeader h;
  h.magic = next_token();
  try {
    h.width = std::stol(next_token());
    h.height = std::stol(next_token());
    h.maxval = std::stol(next_token());
  } catch (const std::exception&) {
    throw std::runtime_error("malformed image header: " + path.string());
  }
  if (pos < bytes.size() &&
      std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    ++pos;  // single whitespace separates the header from the raster
  }
  h.data_offset = pos;
  return h;
}

bool parse_number(const std::string& tok, long long* out) {
  if (tok.empty()) return false;
  size_t idx = 0;
  try {
    *out = std::stoll(tok, &idx);
  } catch (const std::exception&) {
    return false;
  }
  return idx == tok.size();
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

}  // namespace

DepthMap load_depth_frame(const std::filesystem::path& path) {
  const std::vector<char> bytes = read_file_bytes(path);
  const PnmHeader h = parse_pnm_header(bytes, path);
  if (h.magic != "P5") {
    throw std::runtime_error("not a binary PGM depth file: " + path.string());
  }
  if (h.width <= 0 || h.height <= 0) {
    throw std::runtime_error("bad image dimensions: " + path.string());
  }
  if (h.maxval <= 255) {
    throw std::runtime_error("unsupported bit depth (need 16-bit samples): " +
                             path.string());
  }
  if (h.maxval > 65535) {
    throw std::runtime_error("bad maxval: " + path.string());
  }
  const size_t expected =
      static_cast<size_t>(h.width) * static_cast<size_t>(h.height) * 2;
  if (bytes.size() - h.data_offset != expected) {
    throw std::runtime_error("raster does not match header dimensions: " +
                             path.string());
  }
  DepthMap m = make_depth_map(static_cast<int>(h.width),
                              static_cast<int>(h.height));
  const unsigned char* raw =
      reinterpret_cast<const unsigned char*>(bytes.data()) + h.data_offset;
  for (size_t i = 0; i < m.values.size(); ++i) {
    m.values[i] = static_cast<uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  }
  return m;
}

void save_depth_frame(const DepthMap& frame,
                      const std::filesystem::path& path) {
  if (frame.width <= 0 || frame.height <= 0 ||
      frame.values.size() != frame.size()) {
    throw std::invalid_argument("save_depth_frame: malformed frame");
  }
  std::string out;
  out.reserve(frame.values.size() * 2 + 32);
  out += "P5\n";
  out += std::to_string(frame.width) + " " + std::to_string(frame.height) +
         "\n65535\n";
  for (uint16_t v : frame.values) {
    out += static_cast<char>(v >> 8);
    out += static_cast<char>(v & 0xff);
  }
  write_text_atomic(path, out);
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open ground truth: " + path.string());
  }
  GroundTruth gt;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::vector<std::string> toks = split_tokens(line);
    if (toks.empty()) continue;

    // six numeric fields, or seven with a status word third (track output)
    if (toks.size() == 7) {
      toks.erase(toks.begin() + 2);
    } else if (toks.size() != 6) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 6 fields");
    }
    long long v[6];
    for (int i = 0; i < 6; ++i) {
      if (!parse_number(toks[i], &v[i])) {
        throw std::runtime_error(path.string() + ":" +
                                 std::to_string(line_no) + ": bad number '" +
                                 toks[i] + "'");
      }
    }
    GroundTruthEntry e;
    e.object_id = static_cast<int>(v[1]);
    e.box = Box{static_cast<int>(v[2]), static_cast<int>(v[3]),
                static_cast<int>(v[4]), static_cast<int>(v[5])};
    gt.frames[static_cast<int>(v[0])].push_back(e);
  }
  return gt;
}

void save_ground_truth(const GroundTruth& gt,
                       const std::filesystem::path& path) {
  std::string out;
  for (const auto& [frame, entries] : gt.frames) {
    for (const GroundTruthEntry& e : entries) {
      out += std::to_string(frame) + " " + std::to_string(e.object_id) + " " +
             std::to_string(e.box.x) + " " + std::to_string(e.box.y) + " " +
             std::to_string(e.box.w) + " " + std::to_string(e.box.h) + "\n";
    }
  }
  write_text_atomic(path, out);
}

SequenceReader SequenceReader::open(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) {
    throw std::runtime_error("cannot open manifest: " + manifest.string());
  }
  SequenceReader r;
  r.manifest_ = manifest;
  const std::filesystem::path base = manifest.parent_path();
  std::string line;
  while (std::getline(in, line)) {
    // trim both ends
    auto l = line.find_first_not_of(" \t\r");
    if (l == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    std::string entry = line.substr(l, e - l + 1);
    if (entry.empty() || entry[0] == '#') continue;
    if (entry.rfind("gt:", 0) == 0) {
      if (r.gt_) {
        throw std::runtime_error("manifest has two gt lines: " +
                                 manifest.string());
      }
      std::string p = entry.substr(3);
      auto pl = p.find_first_not_of(" \t");
      if (pl == std::string::npos) {
        throw std::runtime_error("manifest gt line has no path: " +
                                 manifest.string());
      }
      std::filesystem::path gt_path(p.substr(pl));
      if (gt_path.is_relative()) gt_path = base / gt_path;
      r.gt_ = load_ground_truth(gt_path);
      continue;
    }
    std::filesystem::path fp(entry);
    if (fp.is_relative()) fp = base / fp;
    r.paths_.push_back(fp);
  }
  if (r.paths_.empty()) {
    throw std::runtime_error("manifest lists no frames: " + manifest.string());
  }
  return r;
}

DepthMap SequenceReader::frame(size_t index) {
  if (index >= paths_.size()) {
    throw std::out_of_range("frame index out of range");
  }
  DepthMap m = load_depth_frame(paths_[index]);
  m.frame_index = static_cast<int>(index);
  if (width_ == 0) {
    width_ = m.width;
    height_ = m.height;
  } else if (m.width != width_ || m.height != height_) {
    throw std::runtime_error("frame dimensions differ across the sequence: " +
                             paths_[index].string());
  }
  return m;
}

SequenceReader load_sequence(const std::filesystem::path& manifest) {
  return SequenceReader::open(manifest);
}

void SceneSpec::validate() const {
  if (frames < 1) throw std::invalid_argument("scene: needs at least 1 frame");
  if (width < 8 || height < 8) {
    throw std::invalid_argument("scene: frame too small");
  }
  if (background_depth == 0) {
    throw std::invalid_argument("scene: background depth cannot be a hole");
  }
  for (size_t i = 0; i < actors.size(); ++i) {
    const ActorSpec& a = actors[i];
    const std::string who = "actor " + std::to_string(i);
    if (a.depth == 0) throw std::invalid_argument(who + ": depth is a hole");
    if (a.depth >= background_depth) {
      throw std::invalid_argument(who + ": behind the background");
    }
    if (a.shape == ActorSpec::Shape::Rect) {
      if (a.w <= 0 || a.h <= 0) {
        throw std::invalid_argument(who + ": empty rect");
      }
    } else if (a.radius < 0.5) {
      throw std::invalid_argument(who + ": radius too small");
    }
    for (size_t m = 0; m < a.moves.size(); ++m) {
      if (a.moves[m].frame < 0 ||
          (m > 0 && a.moves[m].frame <= a.moves[m - 1].frame)) {
        throw std::invalid_argument(who + ": moves must be ascending");
      }
    }
  }
  if (noise.sensor_stddev < 0 || noise.blob_count < 0 ||
      noise.hole_prob < 0 || noise.hole_prob >= 1.0) {
    throw std::invalid_argument("scene: bad noise recipe");
  }
  if (noise.blob_count > 0 &&
      (noise.blob_area_min < 1 || noise.blob_area_max < noise.blob_area_min)) {
    throw std::invalid_argument("scene: bad blob area range");
  }
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open scene spec: " + path.string());
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error("bad scene spec " + path.string() + ": " +
                             e.what());
  }
  SceneSpec s;
  s.frames = j.value("frames", 0);
  s.width = j.value("width", 0);
  s.height = j.value("height", 0);
  s.background_depth = j.value("background_depth", 8000);
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    s.noise.sensor_stddev = n.value("sensor_stddev", 0.0);
    s.noise.blob_count = n.value("blob_count", 0);
    s.noise.blob_area_min = n.value("blob_area_min", 100);
    s.noise.blob_area_max = n.value("blob_area_max", 3000);
    s.noise.hole_prob = n.value("hole_prob", 0.0);
  }
  for (const auto& ja : j.value("actors", nlohmann::json::array())) {
    ActorSpec a;
    const std::string shape = ja.value("shape", "rect");
    if (shape == "rect") {
      a.shape = ActorSpec::Shape::Rect;
    } else if (shape == "disc") {
      a.shape = ActorSpec::Shape::Disc;
    } else {
      throw std::runtime_error("bad actor shape: " + shape);
    }
    a.x = ja.value("x", 0.0);
    a.y = ja.value("y", 0.0);
    a.w = ja.value("w", 0);
    a.h = ja.value("h", 0);
    a.radius = ja.value("radius", 0.0);
    a.depth = ja.value("depth", 1500);
    a.vx = ja.value("vx", 0.0);
    a.vy = ja.value("vy", 0.0);
    for (const auto& jm : ja.value("moves", nlohmann::json::array())) {
      a.moves.push_back({jm.value("frame", 0), jm.value("vx", 0.0),
                         jm.value("vy", 0.0)});
    }
    s.actors.push_back(std::move(a));
  }
  s.validate();
  return s;
}

namespace {

struct Placed {
  Box bbox;
  Mask pixels;
};

// Rasterizes one actor at a frame position. Throws when any pixel would fall
// outside the frame.
Placed rasterize_actor(const ActorSpec& a, double px, double py, int w, int h,
                       size_t index) {
  Placed out;
  const std::string who = "actor " + std::to_string(index);
  if (a.shape == ActorSpec::Shape::Rect) {
    int x0 = static_cast<int>(std::lround(px));
    int y0 = static_cast<int>(std::lround(py));
    if (x0 < 0 || y0 < 0 || x0 + a.w > w || y0 + a.h > h) {
      throw std::invalid_argument(who + " leaves the frame");
    }
    out.bbox = Box{x0, y0, a.w, a.h};
    for (int y = y0; y < y0 + a.h; ++y) {
      for (int x = x0; x < x0 + a.w; ++x) {
        out.pixels.push_back(pack_pixel(x, y, w));
      }
    }
  } else {
    int x0 = static_cast<int>(std::floor(px - a.radius));
    int x1 = static_cast<int>(std::ceil(px + a.radius));
    int y0 = static_cast<int>(std::floor(py - a.radius));
    int y1 = static_cast<int>(std::ceil(py + a.radius));
    if (x0 < 0 || y0 < 0 || x1 >= w || y1 >= h) {
      throw std::invalid_argument(who + " leaves the frame");
    }
    const double r2 = a.radius * a.radius;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        double dx = x - px;
        double dy = y - py;
        if (dx * dx + dy * dy <= r2) {
          out.pixels.push_back(pack_pixel(x, y, w));
        }
      }
    }
    if (out.pixels.empty()) {
      throw std::invalid_argument(who + " rasterizes to nothing");
    }
    out.bbox = mask_bbox(out.pixels, w);
  }
  std::sort(out.pixels.begin(), out.pixels.end());
  return out;
}

bool boxes_closer_than(const Box& a, const Box& b, int margin) {
  return a.x < b.right() + margin && b.x < a.right() + margin &&
         a.y < b.bottom() + margin && b.y < a.bottom() + margin;
}

}  // namespace

SyntheticScene synthesize_scene(const SceneSpec& spec, uint64_t seed) {
  spec.validate();
  const int w = spec.width;
  const int h = spec.height;
  const size_t n = static_cast<size_t>(w) * h;
  std::mt19937_64 rng(seed);

  // trajectories first, so an actor that would ever leave the frame fails the
  // whole run before anything is produced
  const size_t na = spec.actors.size();
  std::vector<std::vector<std::pair<double, double>>> pos(na);
  for (size_t a = 0; a < na; ++a) {
    double x = spec.actors[a].x;
    double y = spec.actors[a].y;
    double vx = spec.actors[a].vx;
    double vy = spec.actors[a].vy;
    size_t next_move = 0;
    pos[a].reserve(spec.frames);
    for (int t = 0; t < spec.frames; ++t) {
      const auto& moves = spec.actors[a].moves;
      while (next_move < moves.size() && moves[next_move].frame == t) {
        vx = moves[next_move].vx;
        vy = moves[next_move].vy;
        ++next_move;
      }
      pos[a].emplace_back(x, y);
      x += vx;
      y += vy;
    }
  }

  SyntheticScene scene;
  scene.frames.reserve(spec.frames);
  scene.actor_masks.assign(spec.frames, {});

  std::vector<size_t> draw_order(na);
  for (size_t i = 0; i < na; ++i) draw_order[i] = i;
  std::stable_sort(draw_order.begin(), draw_order.end(),
                   [&](size_t l, size_t r) {
                     return spec.actors[l].depth > spec.actors[r].depth;
                   });

  for (int t = 0; t < spec.frames; ++t) {
    DepthMap frame = make_depth_map(w, h, spec.background_depth, t);
    std::vector<int32_t> owner(n, -1);
    std::vector<Box> actor_boxes(na);
    for (size_t a : draw_order) {  // far to near, nearer overwrites
      Placed p = rasterize_actor(spec.actors[a], pos[a][t].first,
                                 pos[a][t].second, w, h, a);
      actor_boxes[a] = p.bbox;
      for (PixelIndex px : p.pixels) {
        frame.values[px] = spec.actors[a].depth;
        owner[px] = static_cast<int32_t>(a);
      }
    }

    scene.actor_masks[t].assign(na, {});
    for (size_t i = 0; i < n; ++i) {
      if (owner[i] >= 0) {
        scene.actor_masks[t][static_cast<size_t>(owner[i])].push_back(
            static_cast<PixelIndex>(i));
      }
    }
    for (size_t a = 0; a < na; ++a) {
      if (scene.actor_masks[t][a].empty()) continue;  // fully covered
      GroundTruthEntry e;
      e.object_id = static_cast<int>(a);
      e.box = mask_bbox(scene.actor_masks[t][a], w);
      scene.gt.frames[t].push_back(e);
    }

    if (spec.noise.sensor_stddev > 0) {
      std::normal_distribution<double> jitter(0.0, spec.noise.sensor_stddev);
      for (size_t i = 0; i < n; ++i) {
        long v = std::lround(frame.values[i] + jitter(rng));
        frame.values[i] =
            static_cast<uint16_t>(std::clamp(v, 1L, 65535L));
      }
    }

    if (spec.noise.blob_count > 0) {
      const int side_min = static_cast<int>(
          std::ceil(std::sqrt(static_cast<double>(spec.noise.blob_area_min))));
      const int side_max = static_cast<int>(std::floor(
          std::sqrt(static_cast<double>(spec.noise.blob_area_max))));
      if (side_min > side_max) {
        throw std::invalid_argument("scene: blob area range holds no square");
      }
      std::uniform_int_distribution<int> side_dist(side_min, side_max);
      std::uniform_int_distribution<int> depth_dist(1000, 5000);
      // keep blobs far enough from everything that smoothing cannot bridge
      // two patches into one basin
      const int margin = 9;
      const int border = 6;
      std::vector<Box> placed_blobs;
      for (int b = 0; b < spec.noise.blob_count; ++b) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
          const int side = side_dist(rng);
          if (w - side - 2 * border <= 0 || h - side - 2 * border <= 0) {
            continue;
          }
          std::uniform_int_distribution<int> xd(border, w - side - border);
          std::uniform_int_distribution<int> yd(border, h - side - border);
          Box box{xd(rng), yd(rng), side, side};
          const uint16_t depth = static_cast<uint16_t>(depth_dist(rng));
          bool clear = true;
          for (size_t a = 0; a < na && clear; ++a) {
            clear = !boxes_closer_than(box, actor_boxes[a], margin);
          }
          for (const Box& other : placed_blobs) {
            if (!clear) break;
            clear = !boxes_closer_than(box, other, margin);
          }
          if (!clear) continue;
          for (int y = box.y; y < box.bottom(); ++y) {
            for (int x = box.x; x < box.right(); ++x) {
              frame.at(x, y) = depth;
            }
          }
          placed_blobs.push_back(box);
          placed = true;
        }
        if (!placed) {
          throw std::invalid_argument("scene: no room for a noise blob");
        }
      }
    }

    if (spec.noise.hole_prob > 0) {
      std::bernoulli_distribution drop(spec.noise.hole_prob);
      for (size_t i = 0; i < n; ++i) {
        if (drop(rng)) frame.values[i] = 0;
      }
    }

    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

namespace {

struct Rgb {
  unsigned char r, g, b;
};

constexpr Rgb kPalette[8] = {
    {230, 60, 60},   // red
    {60, 200, 60},   // green
    {70, 110, 240},  // blue
    {230, 220, 50},  // yellow
    {220, 70, 220},  // magenta
    {60, 210, 210},  // cyan
    {240, 150, 40},  // orange
    {245, 245, 245}, // white
};

}  // namespace

void write_overlay(const DepthMap& frame,
                   const std::vector<OverlayShape>& shapes,
                   const std::filesystem::path& path) {
  const int w = frame.width;
  const int h = frame.height;
  std::vector<unsigned char> rgb(static_cast<size_t>(w) * h * 3);
  for (size_t i = 0; i < frame.values.size(); ++i) {
    // 14-bit indoor range squeezed into 8 bits for viewing
    unsigned char grey =
        static_cast<unsigned char>(std::min(255, frame.values[i] >> 5));
    rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = grey;
  }
  auto put = [&](int x, int y, const Rgb& c) {
    if (x < 0 || x >= w || y < 0 || y >= h) return;
    size_t i = (static_cast<size_t>(y) * w + x) * 3;
    rgb[i] = c.r;
    rgb[i + 1] = c.g;
    rgb[i + 2] = c.b;
  };
  for (const OverlayShape& s : shapes) {
    const Rgb c = kPalette[((s.id % 8) + 8) % 8];
    if (!s.mask.empty()) {
      for (PixelIndex p : mask_boundary(s.mask, w, h)) {
        put(static_cast<int>(p % static_cast<PixelIndex>(w)),
            static_cast<int>(p / static_cast<PixelIndex>(w)), c);
      }
    }
    for (int x = s.box.x; x < s.box.right(); ++x) {
      put(x, s.box.y, c);
      put(x, s.box.bottom() - 1, c);
    }
    for (int y = s.box.y; y < s.box.bottom(); ++y) {
      put(s.box.x, y, c);
      put(s.box.right() - 1, y, c);
    }
  }
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(rgb.data()), rgb.size());
  write_text_atomic(path, out);
}

}  // namespace depthtrack
