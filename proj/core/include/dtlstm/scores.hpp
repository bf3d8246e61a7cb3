#pragma once

#include <Eigen/Core>

#include <string>

namespace dtlstm {

/// Per-class scores from one classifier or stream.
struct ClassScores {
  std::string producer;
  Eigen::VectorXd values;

  Eigen::Index classes() const { return values.size(); }
};

}  // namespace dtlstm
