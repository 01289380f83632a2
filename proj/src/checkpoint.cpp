#include "scan/checkpoint.hpp"

#include <cstring>

#include "json.hpp"
#include "scan/fs_util.hpp"
#include "scan/json_io.hpp"
#include "scan/rng.hpp"

namespace scan {

namespace {

constexpr const char* kFormatTag = "seq2seq-checkpoint-v1";

void append_doubles(std::string& out, const double* src, std::size_t n) {
  const auto old = out.size();
  out.resize(old + n * sizeof(double));
  std::memcpy(out.data() + old, src, n * sizeof(double));
}

std::vector<double> take_doubles(const std::string& bytes, std::size_t& pos,
                                 std::size_t n) {
  std::vector<double> vals(n);
  std::memcpy(vals.data(), bytes.data() + pos, n * sizeof(double));
  pos += n * sizeof(double);
  return vals;
}

}  // namespace

Checkpoint snapshot(const Seq2SeqModel& model, const TrainConfig& tc,
                    std::uint64_t steps_done, const std::string& present_state,
                    const std::string& teacher_state,
                    const std::string& dropout_state) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.tc = tc;
  ckpt.steps_done = steps_done;
  ckpt.adam_steps = model.store().step_count();
  for (const ParamInfo& p : model.store().params()) {
    ParamBlob blob;
    blob.name = p.name;
    blob.rows = p.rows;
    blob.cols = p.cols;
    const double* vals = model.tape().value(p.node);
    blob.values.assign(vals, vals + p.rows * p.cols);
    ckpt.params.push_back(std::move(blob));
  }
  ckpt.moment1 = model.store().moment1();
  ckpt.moment2 = model.store().moment2();
  ckpt.present_state = present_state;
  ckpt.teacher_state = teacher_state;
  ckpt.dropout_state = dropout_state;
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["format"] = kFormatTag;
  header["config"] = ckpt.config;
  header["train"] = ckpt.tc;
  header["steps_done"] = ckpt.steps_done;
  header["adam_steps"] = ckpt.adam_steps;
  header["rng"] = {{"present", ckpt.present_state},
                   {"teacher", ckpt.teacher_state},
                   {"dropout", ckpt.dropout_state}};
  nlohmann::json table = nlohmann::json::array();
  for (const ParamBlob& blob : ckpt.params) {
    table.push_back(
        {{"name", blob.name}, {"rows", blob.rows}, {"cols", blob.cols}});
  }
  header["params"] = std::move(table);

  std::string bytes = header.dump();
  bytes += '\n';
  for (const ParamBlob& blob : ckpt.params) {
    append_doubles(bytes, blob.values.data(), blob.values.size());
  }
  append_doubles(bytes, ckpt.moment1.data(), ckpt.moment1.size());
  append_doubles(bytes, ckpt.moment2.data(), ckpt.moment2.size());
  atomic_write_file(path, bytes);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string bytes = read_file(path);
  const std::size_t nl = bytes.find('\n');
  if (nl == std::string::npos) {
    throw CheckpointError("no header line in " + path);
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("bad header in " + path + ": " + e.what());
  }
  if (header.value("format", "") != kFormatTag) {
    throw CheckpointError("unrecognized format in " + path);
  }

  Checkpoint ckpt;
  try {
    ckpt.config = header.at("config").get<ModelConfig>();
    ckpt.tc = header.at("train").get<TrainConfig>();
    ckpt.steps_done = header.at("steps_done").get<std::uint64_t>();
    ckpt.adam_steps = header.at("adam_steps").get<std::uint64_t>();
    const auto& rng = header.at("rng");
    ckpt.present_state = rng.at("present").get<std::string>();
    ckpt.teacher_state = rng.at("teacher").get<std::string>();
    ckpt.dropout_state = rng.at("dropout").get<std::string>();
    std::size_t total = 0;
    for (const auto& entry : header.at("params")) {
      ParamBlob blob;
      blob.name = entry.at("name").get<std::string>();
      blob.rows = entry.at("rows").get<std::size_t>();
      blob.cols = entry.at("cols").get<std::size_t>();
      total += blob.rows * blob.cols;
      ckpt.params.push_back(std::move(blob));
    }
    const std::size_t payload = bytes.size() - nl - 1;
    if (payload != 3 * total * sizeof(double)) {
      throw CheckpointError("payload size mismatch in " + path);
    }
    std::size_t pos = nl + 1;
    for (ParamBlob& blob : ckpt.params) {
      blob.values = take_doubles(bytes, pos, blob.rows * blob.cols);
    }
    ckpt.moment1 = take_doubles(bytes, pos, total);
    ckpt.moment2 = take_doubles(bytes, pos, total);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("bad header field in " + path + ": " + e.what());
  }
  return ckpt;
}

std::unique_ptr<Seq2SeqModel> restore_model(const Checkpoint& ckpt) {
  auto model = std::make_unique<Seq2SeqModel>(ckpt.config,
                                              derive_seed(ckpt.tc.seed, 0));
  const auto& infos = model->store().params();
  if (infos.size() != ckpt.params.size()) {
    throw CheckpointError("parameter count mismatch on restore");
  }
  for (std::size_t i = 0; i < infos.size(); ++i) {
    const ParamInfo& p = infos[i];
    const ParamBlob& blob = ckpt.params[i];
    if (p.name != blob.name || p.rows != blob.rows || p.cols != blob.cols) {
      throw CheckpointError("parameter mismatch on restore: expected " +
                            p.name + ", got " + blob.name);
    }
    std::memcpy(model->tape().value(p.node), blob.values.data(),
                blob.values.size() * sizeof(double));
  }
  try {
    model->store().restore_moments(ckpt.moment1, ckpt.moment2,
                                   ckpt.adam_steps);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(e.what());
  }
  return model;
}

}  // namespace scan
