#include "deformloc/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "deformloc/errors.hpp"

namespace deformloc {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw data_error("IoError", "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw data_error("IoError", "cannot write " + path.string());
  return out;
}

void put_f32(std::ostream& out, float v) {
  out.write(reinterpret_cast<const char*>(&v), 4);  // little-endian host
}

float get_f32(std::istream& in) {
  float v;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

std::string ArtifactTag::comment() const {
  std::ostringstream os;
  os << "seed=" << seed << " config=" << std::hex << config_hash;
  return os.str();
}

// ---------------------------------------------------------------------------
// OBJ
// ---------------------------------------------------------------------------

TriangleMesh read_obj(const fs::path& path) {
  auto in = open_in(path);
  TriangleMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 v;
      ls >> v.x >> v.y >> v.z;
      if (!ls) throw data_error("IoError", "malformed vertex in " + path.string());
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // accept "i", "i/..", "i//.."
        idx.push_back(std::stoi(tok.substr(0, tok.find('/'))));
      }
      if (idx.size() != 3)
        throw data_error("IoError",
                         "non-triangle face in " + path.string() +
                             " (triangles only)");
      mesh.triangles.push_back({idx[0] - 1, idx[1] - 1, idx[2] - 1});
    }
  }
  mesh.validate();
  return mesh;
}

void write_obj(const fs::path& path, const TriangleMesh& mesh, const ArtifactTag& tag) {
  auto out = open_out(path);
  out << "# " << tag.comment() << "\n";
  out.precision(17);
  for (const auto& v : mesh.vertices)
    out << "v " << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

// ---------------------------------------------------------------------------
// PLY
// ---------------------------------------------------------------------------

namespace {

struct PlyHeader {
  size_t count = 0;
  bool has_label = false;
};

PlyHeader read_ply_header(std::istream& in, const fs::path& path) {
  std::string line;
  std::getline(in, line);
  if (line != "ply") throw data_error("IoError", path.string() + ": not a PLY file");
  PlyHeader hdr;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "binary_little_endian")
        throw data_error("IoError", path.string() + ": expected binary_little_endian");
    } else if (tag == "element") {
      std::string name;
      ls >> name >> hdr.count;
      if (name != "vertex")
        throw data_error("IoError", path.string() + ": unsupported element " + name);
    } else if (tag == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
      if (name == "label") hdr.has_label = true;
    } else if (tag == "end_header") {
      break;
    }
  }
  if (props.size() < 3 || props[0] != "x" || props[1] != "y" || props[2] != "z")
    throw data_error("IoError", path.string() + ": expected x,y,z properties");
  return hdr;
}

void write_ply_header(std::ostream& out, size_t count, bool label,
                      const ArtifactTag& tag) {
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "comment " << tag.comment() << "\n";
  out << "element vertex " << count << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (label) out << "property uchar label\n";
  out << "end_header\n";
}

}  // namespace

std::vector<Vec3> read_ply_points(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  PlyHeader hdr = read_ply_header(in, path);
  std::vector<Vec3> pts(hdr.count);
  for (auto& p : pts) {
    p.x = get_f32(in);
    p.y = get_f32(in);
    p.z = get_f32(in);
    if (hdr.has_label) in.ignore(1);
  }
  if (!in) throw data_error("IoError", path.string() + ": truncated PLY payload");
  return pts;
}

void write_ply_points(const fs::path& path, const std::vector<Vec3>& points,
                      const ArtifactTag& tag) {
  auto out = open_out(path, std::ios::binary);
  write_ply_header(out, points.size(), false, tag);
  for (const auto& p : points) {
    put_f32(out, static_cast<float>(p.x));
    put_f32(out, static_cast<float>(p.y));
    put_f32(out, static_cast<float>(p.z));
  }
}

void read_ply_labeled(const fs::path& path, std::vector<Vec3>& points,
                      std::vector<uint8_t>& labels) {
  auto in = open_in(path, std::ios::binary);
  PlyHeader hdr = read_ply_header(in, path);
  if (!hdr.has_label)
    throw data_error("IoError", path.string() + ": missing label property");
  points.resize(hdr.count);
  labels.resize(hdr.count);
  for (size_t i = 0; i < hdr.count; ++i) {
    points[i].x = get_f32(in);
    points[i].y = get_f32(in);
    points[i].z = get_f32(in);
    char l;
    in.read(&l, 1);
    labels[i] = static_cast<uint8_t>(l);
  }
  if (!in) throw data_error("IoError", path.string() + ": truncated PLY payload");
}

void write_ply_labeled(const fs::path& path, const std::vector<Vec3>& points,
                       const std::vector<uint8_t>& labels, const ArtifactTag& tag) {
  if (points.size() != labels.size())
    throw config_error("LengthMismatch", "points/labels size mismatch");
  auto out = open_out(path, std::ios::binary);
  write_ply_header(out, points.size(), true, tag);
  for (size_t i = 0; i < points.size(); ++i) {
    put_f32(out, static_cast<float>(points[i].x));
    put_f32(out, static_cast<float>(points[i].y));
    put_f32(out, static_cast<float>(points[i].z));
    out.put(static_cast<char>(labels[i]));
  }
}

// ---------------------------------------------------------------------------
// PGM16 depth
// ---------------------------------------------------------------------------

void write_pgm16(const fs::path& path, int width, int height,
                 const std::vector<float>& depth_mm, double mm_per_unit,
                 const ArtifactTag& tag) {
  auto out = open_out(path, std::ios::binary);
  out << "P5\n# mm_per_unit " << mm_per_unit << "\n# " << tag.comment() << "\n"
      << width << " " << height << "\n65535\n";
  for (float d : depth_mm) {
    double units = d > 0 ? d / mm_per_unit : 0.0;
    auto v = static_cast<uint16_t>(std::min(65535.0, std::max(0.0, units + 0.5)));
    out.put(static_cast<char>(v >> 8));  // PGM is big-endian
    out.put(static_cast<char>(v & 0xff));
  }
}

std::vector<float> read_pgm16(const fs::path& path, int& width, int& height) {
  auto in = open_in(path, std::ios::binary);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw data_error("IoError", path.string() + ": not a P5 PGM");
  double mm_per_unit = 0.01;
  auto skip_comments = [&]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "mm_per_unit") ls >> mm_per_unit;
      in >> std::ws;
    }
  };
  skip_comments();
  in >> width;
  skip_comments();
  in >> height;
  skip_comments();
  int maxval;
  in >> maxval;
  in.ignore(1);
  std::vector<float> depth(static_cast<size_t>(width) * static_cast<size_t>(height));
  for (auto& d : depth) {
    int hi = in.get(), lo = in.get();
    auto v = static_cast<uint16_t>((hi << 8) | lo);
    d = v == 0 ? 0.0f : static_cast<float>(v * mm_per_unit);
  }
  return depth;
}

// ---------------------------------------------------------------------------
// Raw volume blobs
// ---------------------------------------------------------------------------

namespace {

void write_sidecar(const fs::path& path, const VolumeHeader& hdr,
                   const std::string& dtype, const ArtifactTag& tag) {
  json j;
  j["dims"] = hdr.dims;
  j["spacing"] = hdr.spacing;
  j["origin"] = {hdr.origin.x, hdr.origin.y, hdr.origin.z};
  j["dtype"] = dtype;
  j["seed"] = tag.seed;
  j["config_hash"] = tag.config_hash;
  write_text_file(fs::path(path.string() + ".json"), j.dump(2) + "\n");
}

VolumeHeader read_sidecar(const fs::path& path, const std::string& dtype) {
  json j = json::parse(read_text_file(fs::path(path.string() + ".json")));
  if (j.value("dtype", dtype) != dtype)
    throw data_error("IoError", path.string() + ": dtype mismatch");
  VolumeHeader hdr;
  hdr.dims = j.at("dims").get<std::array<int, 3>>();
  hdr.spacing = j.at("spacing").get<double>();
  auto o = j.at("origin");
  hdr.origin = {o[0].get<double>(), o[1].get<double>(), o[2].get<double>()};
  return hdr;
}

size_t voxel_count(const VolumeHeader& hdr) {
  return static_cast<size_t>(hdr.dims[0]) * static_cast<size_t>(hdr.dims[1]) *
         static_cast<size_t>(hdr.dims[2]);
}

}  // namespace

void write_raw_f32(const fs::path& path, const VolumeHeader& hdr,
                   const std::vector<float>& values, const ArtifactTag& tag) {
  if (values.size() != voxel_count(hdr))
    throw config_error("LengthMismatch", "volume payload size mismatch");
  auto out = open_out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * 4));
  write_sidecar(path, hdr, "f32", tag);
}

std::vector<float> read_raw_f32(const fs::path& path, VolumeHeader& hdr) {
  hdr = read_sidecar(path, "f32");
  auto in = open_in(path, std::ios::binary);
  std::vector<float> values(voxel_count(hdr));
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * 4));
  if (!in) throw data_error("IoError", path.string() + ": truncated volume");
  return values;
}

void write_raw_u8(const fs::path& path, const VolumeHeader& hdr,
                  const std::vector<uint8_t>& values, const ArtifactTag& tag) {
  if (values.size() != voxel_count(hdr))
    throw config_error("LengthMismatch", "mask payload size mismatch");
  auto out = open_out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size()));
  write_sidecar(path, hdr, "u8", tag);
}

std::vector<uint8_t> read_raw_u8(const fs::path& path, VolumeHeader& hdr) {
  hdr = read_sidecar(path, "u8");
  auto in = open_in(path, std::ios::binary);
  std::vector<uint8_t> values(voxel_count(hdr));
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size()));
  if (!in) throw data_error("IoError", path.string() + ": truncated mask");
  return values;
}

// ---------------------------------------------------------------------------
// Scene
// ---------------------------------------------------------------------------

void write_scene(const fs::path& dir, const Scene& scene, const ArtifactTag& tag) {
  fs::create_directories(dir);
  write_obj(dir / "kidney.obj", scene.kidney, tag);
  json j;
  j["kidney"] = "kidney.obj";
  j["class_count"] = scene.class_count();
  j["seed"] = tag.seed;
  j["config_hash"] = tag.config_hash;
  std::vector<std::string> tumor_files;
  for (size_t k = 0; k < scene.tumors.size(); ++k) {
    std::string name = "tumor_" + std::to_string(k + 1) + ".obj";
    write_obj(dir / name, scene.tumors[k], tag);
    tumor_files.push_back(name);
  }
  j["tumors"] = tumor_files;
  write_text_file(dir / "scene.json", j.dump(2) + "\n");
}

Scene read_scene(const fs::path& scene_json) {
  fs::path dir = scene_json.parent_path();
  json j = json::parse(read_text_file(scene_json));
  Scene scene;
  scene.kidney = read_obj(dir / j.at("kidney").get<std::string>());
  for (const auto& t : j.at("tumors"))
    scene.tumors.push_back(read_obj(dir / t.get<std::string>()));
  return scene;
}

std::string read_text_file(const fs::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  auto out = open_out(path, std::ios::binary);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace deformloc
