// SPDX-License-Identifier: Apache-2.0
#include "config_loader.h"

namespace config {

absl::Status Loader::Load(const std::string& path) {
  TRACE_EVENT("config", "Loader::Load");
  LOG(INFO) << "loading config from " << path;
  std::ifstream in(path);
  if (!in.is_open()) {
    LOG(ERROR) << "cannot open " << path;
    return absl::NotFoundError(path);
  }
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      LOG(ERROR) << path << ":" << lineno << ": missing '='";
      errors_++;
      metrics_->parse_errors->Increment();
      continue;
    }
    values_[line.substr(0, eq)] = line.substr(eq + 1);
  }
  VLOG(1) << "loaded " << values_.size() << " keys";
  metrics_->keys->Set(values_.size());
  return errors_ == 0 ? absl::OkStatus() : absl::InvalidArgumentError("bad lines");
}

int Loader::GetInt(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    VLOG(2) << "missing " << key << ", using " << fallback;
    return fallback;
  }
  return std::stoi(it->second);
}

}  // namespace config
