#pragma once

// Parameter checkpoints: a text manifest of "key value" lines naming each
// tensor with its shape, followed by one little-endian float32 blob holding
// every tensor in manifest order (column-major within a tensor).
//
//   format cgnn-checkpoint
//   version 1
//   dtype float32
//   byte_order little
//   blob params.bin
//   tensor enc_weight 1433 16
//   ...

#include "cgnn/core.hpp"
#include "cgnn/model.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace cgnn {

inline constexpr const char* kManifestName = "checkpoint.txt";
inline constexpr const char* kBlobName = "params.bin";

struct TensorEntry {
  std::string name;
  Index rows = 0;
  Index cols = 0;
};

namespace detail {

inline std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

template <class Params, class Fn>
void for_each_named(Params& p, Fn&& fn) {
  fn("enc_weight", p.enc_weight);
  fn("enc_bias", p.enc_bias);
  fn("dec_weight", p.dec_weight);
  fn("dec_bias", p.dec_bias);
  fn("alpha_raw", p.alpha_raw);
  if (p.weight_spec) {
    fn("weight_basis", p.weight_spec->basis);
    fn("weight_eigen", p.weight_spec->eigen_params);
  }
}

}  // namespace detail

inline std::vector<TensorEntry> checkpoint_layout(const ModelParams& p) {
  std::vector<TensorEntry> out;
  detail::for_each_named(p, [&](const char* name, const auto& t) { out.push_back({name, t.rows(), t.cols()}); });
  return out;
}

inline void save_checkpoint(const ModelParams& p, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / kManifestName, std::ios::binary);
  std::ofstream blob(dir / kBlobName, std::ios::binary);
  if (!manifest || !blob) throw Error("cannot write checkpoint in " + dir.string());
  manifest << "format cgnn-checkpoint\nversion 1\ndtype float32\nbyte_order little\nblob " << kBlobName << '\n';
  detail::for_each_named(p, [&](const char* name, const auto& t) {
    manifest << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    for (Index i = 0; i < t.size(); ++i) {
      const std::uint32_t bits = detail::to_little(std::bit_cast<std::uint32_t>(static_cast<float>(t.data()[i])));
      blob.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  });
  if (!manifest || !blob) throw Error("failed writing checkpoint in " + dir.string());
}

/// Reads a checkpoint written by save_checkpoint. Values come back rounded to
/// float32.
inline ModelParams load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / kManifestName);
  if (!manifest) throw ParseError("missing checkpoint manifest " + (dir / kManifestName).string());
  std::vector<TensorEntry> entries;
  std::string line, blob_name = kBlobName;
  std::size_t lineno = 0;
  while (std::getline(manifest, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string key;
    in >> key;
    if (key == "tensor") {
      TensorEntry e;
      if (!(in >> e.name >> e.rows >> e.cols) || e.rows < 0 || e.cols < 0) {
        throw ParseError("checkpoint manifest line " + std::to_string(lineno) + ": malformed tensor entry");
      }
      entries.push_back(e);
    } else if (key == "blob") {
      in >> blob_name;
    } else if (key == "dtype" || key == "byte_order" || key == "format" || key == "version") {
      std::string value;
      in >> value;
      if ((key == "dtype" && value != "float32") || (key == "byte_order" && value != "little")) {
        throw ParseError("checkpoint manifest: unsupported " + key + " '" + value + "'");
      }
    } else {
      throw ParseError("checkpoint manifest line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }

  std::ifstream blob(dir / blob_name, std::ios::binary);
  if (!blob) throw ParseError("missing checkpoint blob " + (dir / blob_name).string());
  auto read_tensor = [&](const TensorEntry& e) {
    Matrix m(e.rows, e.cols);
    for (Index i = 0; i < m.size(); ++i) {
      std::uint32_t bits = 0;
      if (!blob.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
        throw ParseError("checkpoint blob truncated in tensor " + e.name);
      }
      m.data()[i] = static_cast<double>(std::bit_cast<float>(detail::to_little(bits)));
    }
    return m;
  };

  ModelParams p;
  bool have_basis = false, have_eigen = false;
  WeightSpec ws;
  for (const auto& e : entries) {
    Matrix m = read_tensor(e);
    if (e.name == "enc_weight") p.enc_weight = m;
    else if (e.name == "enc_bias") p.enc_bias = m.reshaped();
    else if (e.name == "dec_weight") p.dec_weight = m;
    else if (e.name == "dec_bias") p.dec_bias = m.reshaped();
    else if (e.name == "alpha_raw") p.alpha_raw = m.reshaped();
    else if (e.name == "weight_basis") { ws.basis = m; have_basis = true; }
    else if (e.name == "weight_eigen") { ws.eigen_params = m.reshaped(); have_eigen = true; }
    else throw ParseError("checkpoint: unknown tensor '" + e.name + "'");
  }
  if (blob.peek() != std::char_traits<char>::eof()) throw ParseError("checkpoint blob has trailing bytes");
  if (have_basis != have_eigen) throw ParseError("checkpoint: weight basis and eigen params must appear together");
  if (have_basis) p.weight_spec = ws;
  if (p.enc_weight.size() == 0 || p.dec_weight.size() == 0 || p.alpha_raw.size() == 0) {
    throw ParseError("checkpoint: missing encoder, decoder or alpha tensors");
  }
  return p;
}

}  // namespace cgnn
