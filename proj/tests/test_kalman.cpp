#include <gtest/gtest.h>

#include "ibtrack/kalman.hpp"
#include "oracles.hpp"

using ibtrack::BBox;
using ibtrack::KalmanParams;
using ibtrack::KalmanState;
using ibtrack::StateMatrix;

namespace {

double asymmetry(const StateMatrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

oracle::Scalar2 x_block(const KalmanState& st)
{
  return {st.mean(0), st.mean(4), st.covariance(0, 0), st.covariance(0, 4), st.covariance(4, 4)};
}

}  // namespace

TEST(Kalman, InitFromBox)
{
  const KalmanState a = ibtrack::kf_init(BBox(0, 0, 10, 10));
  ibtrack::StateVector expected;
  expected << 5, 5, 100, 1, 0, 0, 0;
  EXPECT_EQ(a.mean, expected);

  const KalmanState b = ibtrack::kf_init(BBox(0, 0, 20, 10));
  expected << 10, 5, 200, 2, 0, 0, 0;
  EXPECT_EQ(b.mean, expected);

  ibtrack::StateVector diag;
  diag << 10, 10, 10, 10, 1e4, 1e4, 1e4;
  EXPECT_EQ(b.covariance, StateMatrix(diag.asDiagonal()));
}

TEST(Kalman, PredictIsLinearMotion)
{
  KalmanState st = ibtrack::kf_init(BBox(0, 0, 10, 10));
  st.mean(5) = 2;
  const KalmanState p = ibtrack::kf_predict(st);
  EXPECT_EQ(p.mean(0), 5);
  EXPECT_EQ(p.mean(1), 7);
  EXPECT_EQ(p.mean(2), 100);
}

TEST(Kalman, ZeroVelocityZeroNoiseIsFixedPoint)
{
  KalmanParams zero;
  zero.process_position_var = zero.process_velocity_var = zero.process_scale_velocity_var = 0.0;
  const KalmanState st = ibtrack::kf_init(BBox(3, 4, 10, 20), zero);
  EXPECT_EQ(ibtrack::kf_predict(st, zero).mean, st.mean);
}

TEST(Kalman, TwoStepPredictionMatchesScalarRecursion)
{
  KalmanState st = ibtrack::kf_init(BBox(0, 0, 10, 10));
  st.mean(4) = 2;
  const KalmanParams p;
  oracle::Scalar2 ref{5, 2, 10, 0, 1e4};
  for (int k = 0; k < 2; ++k) {
    st = ibtrack::kf_predict(st, p);
    ref = oracle::scalar_predict(ref, p.process_position_var, p.process_velocity_var);
  }
  const auto got = x_block(st);
  EXPECT_NEAR(got.x, ref.x, 1e-12);
  EXPECT_NEAR(got.pxx, ref.pxx, 1e-9);
  EXPECT_NEAR(got.pxv, ref.pxv, 1e-9);
  EXPECT_NEAR(got.pvv, ref.pvv, 1e-9);
  // frozen hand values: x = 5 + 2*2; pxx = 10 + 4*1e4 + 2*1 + 1e-2
  EXPECT_NEAR(got.x, 9.0, 1e-12);
  EXPECT_NEAR(got.pxx, 40012.01, 1e-9);
  EXPECT_NEAR(got.pxv, 20000.01, 1e-9);
  EXPECT_NEAR(got.pvv, 10000.02, 1e-9);
}

TEST(Kalman, UpdateMatchesScalarGains)
{
  const KalmanParams p;
  KalmanState st = ibtrack::kf_predict(ibtrack::kf_init(BBox(0, 0, 10, 10)), p);
  oracle::Scalar2 ref = oracle::scalar_predict({5, 0, 10, 0, 1e4}, 1.0, 1e-2);
  // only the x centre moves, so the x block is the whole innovation
  st = ibtrack::kf_update(st, BBox(2, 0, 10, 10), p);
  ref = oracle::scalar_update(ref, 7.0, p.measurement_center_var);
  const auto got = x_block(st);
  EXPECT_NEAR(got.x, ref.x, 1e-9);
  EXPECT_NEAR(got.v, ref.v, 1e-9);
  EXPECT_NEAR(got.pxx, ref.pxx, 1e-7);
  EXPECT_NEAR(got.pxv, ref.pxv, 1e-7);
  EXPECT_NEAR(got.pvv, ref.pvv, 1e-7);
  // frozen hand values: gains 10011/10012 and 10000/10012 on an innovation of 2
  EXPECT_NEAR(got.x, 5.0 + 2.0 * 10011.0 / 10012.0, 1e-9);
  EXPECT_NEAR(got.v, 2.0 * 10000.0 / 10012.0, 1e-9);
  EXPECT_NEAR(got.pxx, 10011.0 / 10012.0, 1e-7);
  EXPECT_EQ(st.mean(1), 5);
  EXPECT_EQ(st.mean(2), 100);
}

TEST(Kalman, ZeroInnovationKeepsMean)
{
  const KalmanState prior = ibtrack::kf_predict(ibtrack::kf_init(BBox(10, 20, 30, 40)));
  const KalmanState post = ibtrack::kf_update(prior, ibtrack::state_to_box(prior.mean));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(post.mean(i), prior.mean(i), 1e-9);
}

TEST(Kalman, RepeatedUpdatesContractTowardMeasurement)
{
  KalmanState st = ibtrack::kf_init(BBox(0, 0, 10, 10));
  const BBox target(40, 25, 10, 10);
  double prev = 1e9;
  for (int k = 0; k < 15; ++k) {
    st = ibtrack::kf_update(st, target);
    const double d = ibtrack::distance({st.mean(0), st.mean(1)}, ibtrack::center(target));
    EXPECT_LE(d, prev);
    prev = d;
  }
}

TEST(Kalman, CovarianceSymmetricAndTraceMonotone)
{
  KalmanState st = ibtrack::kf_init(BBox(5, 5, 20, 30));
  for (int k = 0; k < 30; ++k) {
    const KalmanState pred = ibtrack::kf_predict(st);
    EXPECT_LT(asymmetry(pred.covariance), 1e-9);
    EXPECT_GE(pred.covariance.trace(), st.covariance.trace());
    const BBox z(5 + 3.0 * k, 5 + 1.5 * k, 20, 30);
    st = ibtrack::kf_update(pred, z);
    EXPECT_LT(asymmetry(st.covariance), 1e-9);
    EXPECT_LE(st.covariance.trace(), pred.covariance.trace());
  }
}

TEST(Kalman, NonPositiveScaleIsFrozenAndFlagged)
{
  KalmanState st = ibtrack::kf_init(BBox(0, 0, 10, 10));
  st.mean(6) = -150;  // area shrinks past zero in one frame
  const KalmanState p = ibtrack::kf_predict(st);
  EXPECT_TRUE(p.scale_clamped);
  EXPECT_EQ(p.mean(2), ibtrack::kMinScale);
  EXPECT_EQ(p.mean(6), 0.0);
  EXPECT_NO_THROW(ibtrack::state_to_box(p.mean));
}
