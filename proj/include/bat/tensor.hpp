#pragma once

#include <functional>
#include <string>
#include <vector>

namespace bat::ad {

// Dimension list; rank 1 and 2 cover everything the network needs.
using Shape = std::vector<int>;

int numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tape;

// Lightweight handle into a tape's node table.
struct Tensor {
  Tape* tape = nullptr;
  int id = -1;
};

// Records a forward computation as a topologically ordered node list and
// replays it in reverse for gradients. 64-bit floats throughout; a tape is
// single-threaded, distinct tapes are independent.
class Tape {
 public:
  Tensor leaf(Shape shape, std::vector<double> values);
  Tensor scalar(double v);
  Tensor zeros(Shape shape);

  // elementwise / broadcast
  Tensor add(Tensor a, Tensor b);      // same shape, or (m x n) + (n) on rows
  Tensor add_scalar(Tensor a, double c);
  Tensor scale(Tensor a, double c);
  Tensor smul(Tensor a, Tensor s);     // tensor times scalar tensor
  Tensor mul(Tensor a, Tensor b);      // elementwise, same shape
  Tensor vmax(Tensor a, Tensor b);     // elementwise max, ties go to a

  // linear algebra
  Tensor matmul(Tensor a, Tensor b);   // (m,k)x(k,n)->(m,n) or (m,k)x(k)->(m)

  // nonlinearities
  Tensor sigmoid(Tensor a);
  Tensor tanh(Tensor a);
  Tensor exp(Tensor a);
  Tensor log(Tensor a);                // input clamped to >= 1e-300
  Tensor sin(Tensor a);
  Tensor cos(Tensor a);
  Tensor softplus(Tensor a);
  Tensor leaky_relu(Tensor a, double slope);
  Tensor softmax(Tensor a);            // rank 1, or per row of rank 2

  // structure
  Tensor concat(const std::vector<Tensor>& parts, int axis = 0);
  Tensor slice(Tensor a, int offset, int len);  // rank 1
  Tensor stack_rows(const std::vector<Tensor>& rows);
  Tensor reshape(Tensor a, Shape shape);        // numel preserved

  // reductions
  Tensor reduce_sum(Tensor a);
  Tensor reduce_max(Tensor a);         // gradient routes to the first argmax

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every node at or
  // below loss in the tape. Throws if loss is not scalar.
  void backward(Tensor loss);

  const Shape& shape(Tensor t) const;
  const std::vector<double>& value(Tensor t) const;
  const std::vector<double>& grad(Tensor t) const;
  double scalar_value(Tensor t) const;
  int node_count() const { return static_cast<int>(nodes_.size()); }
  void clear();

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    std::function<void(Tape&)> back;
  };
  std::vector<Node> nodes_;

  Tensor push(Shape shape, std::vector<double> value, std::function<void(Tape&)> back = nullptr);
  Node& at(Tensor t);
  const Node& at(Tensor t) const;
  Tensor unary(const Tensor& a, const char* op,
               const std::function<double(double)>& fwd,
               const std::function<double(double, double)>& dfwd);
};

// Max over components of |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
// using central differences of width eps. f must map the leaf to a scalar;
// non-finite outputs raise std::runtime_error.
double grad_check(const std::function<Tensor(Tape&, Tensor)>& f, const Shape& shape,
                  const std::vector<double>& x, double eps);

}  // namespace bat::ad
