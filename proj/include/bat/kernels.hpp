#pragma once

namespace bat::kernels {

// Thread budget for the OpenMP paths. 1 (the default) routes every call to
// the serial reference implementation. The parallel variants split work by
// output row only, so results are bit-identical to the serial path at any
// thread count.
void set_threads(int n);
int threads();

// C(m x n) = A(m x k) * B(k x n), all row-major, C overwritten.
void matmul_serial(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_parallel(const double* a, const double* b, double* c, int m, int k, int n);
void matmul(const double* a, const double* b, double* c, int m, int k, int n);

// dA(m x k) += dC(m x n) * B(k x n)^T  (gradient w.r.t. the left operand)
void matmul_acc_nt_serial(const double* dc, const double* b, double* da, int m, int k, int n);
void matmul_acc_nt_parallel(const double* dc, const double* b, double* da, int m, int k, int n);
void matmul_acc_nt(const double* dc, const double* b, double* da, int m, int k, int n);

// dB(k x n) += A(m x k)^T * dC(m x n)  (gradient w.r.t. the right operand)
void matmul_acc_tn_serial(const double* a, const double* dc, double* db, int m, int k, int n);
void matmul_acc_tn_parallel(const double* a, const double* dc, double* db, int m, int k, int n);
void matmul_acc_tn(const double* a, const double* dc, double* db, int m, int k, int n);

}  // namespace bat::kernels
