#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include <piclab/piclab.hpp>

#include "oracles.hpp"

using namespace piclab;

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

Eigen::MatrixXd random_orthogonal(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ();
}

}  // namespace

TEST_CASE("pair basis indexing and wedge algebra") {
    SECTION("pair_index enumerates lexicographically") {
        for (int n = 4; n <= 8; ++n) {
            int expect = 0;
            for (int i = 1; i <= n; ++i)
                for (int j = i + 1; j <= n; ++j) REQUIRE(pair_index(n, i, j) == expect++);
            REQUIRE(expect == pair_count(n));
        }
    }
    SECTION("wedge matches the 2x2 minors") {
        Rng rng(11);
        Eigen::VectorXd x(5), y(5);
        for (int i = 0; i < 5; ++i) x(i) = rng.normal(), y(i) = rng.normal();
        const Eigen::VectorXd w = wedge(x, y);
        int p = 0;
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j)
                REQUIRE(w(p++) == x(i) * y(j) - x(j) * y(i));
        REQUIRE(wedge(x, x).norm() == 0.0);
    }
    SECTION("lambda2 of an orthogonal matrix is orthogonal") {
        const Eigen::MatrixXd u = random_orthogonal(6, 3);
        const Eigen::MatrixXd w = lambda2(u);
        const int nn = pair_count(6);
        REQUIRE((w.transpose() * w - Eigen::MatrixXd::Identity(nn, nn)).norm() < 1e-12);
    }
    SECTION("antisym_from_pair inverts the pair flattening") {
        Rng rng(5);
        Eigen::VectorXd u(pair_count(5));
        for (int i = 0; i < u.size(); ++i) u(i) = rng.normal();
        const Eigen::MatrixXd a = antisym_from_pair(5, u);
        REQUIRE((a + a.transpose()).norm() == 0.0);
        int p = 0;
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) REQUIRE(a(i, j) == u(p++));
    }
}

TEST_CASE("construction validates symmetries and the Bianchi identity") {
    SECTION("single entry with full index symmetries") {
        const CurvatureTensor r = make_tensor(4, {{1, 2, 1, 2, 1.0}});
        REQUIRE(r.at(1, 2, 1, 2) == 1.0);
        REQUIRE(r.at(2, 1, 1, 2) == -1.0);
        REQUIRE(r.at(1, 2, 2, 1) == -1.0);
        REQUIRE(r.at(2, 1, 2, 1) == 1.0);
        REQUIRE(r.at(1, 1, 1, 2) == 0.0);
        REQUIRE(r.at(3, 4, 3, 4) == 0.0);
        REQUIRE(r.norm() == 2.0);  // both (12|12) and (12|12)-transposed slots
    }
    SECTION("entries accepted under any representative ordering") {
        // Two off-diagonal components keep the cyclic sum zero.
        const CurvatureTensor r = make_tensor(4, {{3, 4, 1, 2, 2.5}, {2, 4, 1, 3, 2.5}});
        REQUIRE(r.at(1, 2, 3, 4) == 2.5);
        REQUIRE(r.at(4, 3, 1, 2) == -2.5);
        REQUIRE(r.at(1, 3, 2, 4) == 2.5);
        REQUIRE(r.at(1, 4, 2, 3) == 0.0);
    }
    SECTION("index range errors") {
        REQUIRE_THROWS_AS(make_tensor(3, {}), IndexOutOfRange);
        REQUIRE_THROWS_AS(make_tensor(13, {}), IndexOutOfRange);
        REQUIRE_THROWS_AS(make_tensor(4, {{0, 2, 1, 2, 1.0}}), IndexOutOfRange);
        REQUIRE_THROWS_AS(make_tensor(4, {{1, 5, 1, 2, 1.0}}), IndexOutOfRange);
    }
    SECTION("antisymmetry conflicts are rejected") {
        REQUIRE_THROWS_AS(make_tensor(4, {{1, 1, 1, 2, 0.5}}), SymmetryConflict);
        REQUIRE_THROWS_AS(make_tensor(4, {{1, 2, 1, 2, 1.0}, {2, 1, 1, 2, 1.0}}),
                          SymmetryConflict);
        // Consistent duplicates are fine.
        REQUIRE_NOTHROW(make_tensor(4, {{1, 2, 1, 2, 1.0}, {2, 1, 1, 2, -1.0}}));
        REQUIRE_NOTHROW(make_tensor(4, {{1, 1, 1, 2, 0.0}}));
    }
    SECTION("first Bianchi gate") {
        REQUIRE_THROWS_AS(
            make_tensor(4, {{1, 2, 3, 4, 1.0}, {1, 3, 4, 2, 1.0}, {1, 4, 2, 3, 1.0}}),
            BianchiViolation);
        const CurvatureTensor r =
            make_tensor(4, {{1, 2, 3, 4, 1.0}, {1, 3, 4, 2, -2.0}, {1, 4, 2, 3, 1.0}});
        REQUIRE(r.at(1, 3, 4, 2) == -2.0);
        REQUIRE(r.bianchi_residual() < 1e-15);
    }
    SECTION("from_pair_matrix symmetrizes and validates shape") {
        Eigen::MatrixXd bad(5, 5);
        REQUIRE_THROWS_AS(CurvatureTensor::from_pair_matrix(5, bad), DimMismatch);
        Rng rng(7);
        const int nn = pair_count(4);
        Eigen::MatrixXd m(nn, nn);
        for (int i = 0; i < nn; ++i)
            for (int j = 0; j < nn; ++j) m(i, j) = rng.normal();
        const CurvatureTensor r = CurvatureTensor::from_pair_matrix(4, m);
        REQUIRE((r.m - r.m.transpose()).norm() == 0.0);
        REQUIRE((r.m - 0.5 * (m + m.transpose())).norm() == 0.0);
    }
}

TEST_CASE("Bianchi projection is the orthogonal projection onto the kernel") {
    SECTION("kills the totally antisymmetric 4-form") {
        // omega = e1^e2^e3^e4 written with pair symmetries; all sectional
        // slots vanish and the Bianchi sum is maximal.
        const int nn = pair_count(4);
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nn, nn);
        auto set = [&](int i, int j, int k, int l, double v) {
            m(pair_index(4, i, j), pair_index(4, k, l)) = v;
            m(pair_index(4, k, l), pair_index(4, i, j)) = v;
        };
        set(1, 2, 3, 4, 1.0);
        set(1, 3, 2, 4, -1.0);
        set(1, 4, 2, 3, 1.0);
        const CurvatureTensor omega = CurvatureTensor::from_pair_matrix(4, m);
        REQUIRE(omega.bianchi_residual() == 3.0);
        const CurvatureTensor p = project_bianchi(omega);
        REQUIRE(p.norm() < 1e-14 * omega.norm());
    }
    SECTION("agrees with the entrywise reference and is idempotent") {
        for (int n : {4, 5, 6}) {
            Rng rng(100 + n);
            const int nn = pair_count(n);
            Eigen::MatrixXd m(nn, nn);
            for (int i = 0; i < nn; ++i)
                for (int j = 0; j < nn; ++j) m(i, j) = rng.normal();
            const CurvatureTensor t = CurvatureTensor::from_pair_matrix(n, m);
            const CurvatureTensor p = project_bianchi(t);
            const CurvatureTensor ref = oracles::bianchi_projection_reference(t);
            REQUIRE((p.m - ref.m).norm() < 1e-13 * (1.0 + p.m.norm()));
            REQUIRE(p.bianchi_residual() < 1e-13 * (1.0 + p.norm()));
            const CurvatureTensor pp = project_bianchi(p);
            REQUIRE((pp.m - p.m).norm() < 1e-13 * (1.0 + p.m.norm()));
            // Orthogonality of the split: the removed part is perpendicular.
            REQUIRE(close(dot(t - p, p), 0.0, 1e-11 * (1.0 + t.norm() * t.norm())));
        }
    }
    SECTION("fixes tensors already satisfying the identity") {
        const CurvatureTensor i5 = identity_tensor(5);
        REQUIRE((project_bianchi(i5).m - i5.m).norm() < 1e-15);
        const CurvatureTensor cyl = cylinder_tensor(6, 2.0);
        REQUIRE((project_bianchi(cyl).m - cyl.m).norm() < 1e-15);
    }
}

TEST_CASE("model tensors and trace identities") {
    SECTION("identity tensor of dimension 5") {
        const CurvatureTensor i5 = identity_tensor(5);
        REQUIRE(scalar(i5) == 20.0);
        REQUIRE(close(i5.norm(), std::sqrt(40.0), 1e-14));  // |I|^2 = 2 n (n-1)
        const Eigen::VectorXd ev = ricci(i5).eigenvalues();
        for (int i = 0; i < 5; ++i) REQUIRE(close(ev(i), 4.0, 1e-13));
        REQUIRE(i5.at(1, 2, 1, 2) == 1.0);
        REQUIRE(i5.at(1, 2, 3, 4) == 0.0);
        REQUIRE(i5.bianchi_residual() == 0.0);
    }
    SECTION("sphere tensor scales the identity") {
        const CurvatureTensor s = sphere_tensor(6, 2.0);
        REQUIRE(scalar(s) == 2.0 * 6 * 5);
        REQUIRE((s.m - 2.0 * identity_tensor(6).m).norm() == 0.0);
    }
    SECTION("cylinder tensor of dimension 5") {
        const CurvatureTensor cyl = cylinder_tensor(5, 1.0);
        REQUIRE(close(scalar(cyl), 12.0, 1e-13));  // c (n-1)(n-2)
        const Eigen::VectorXd ev = ricci(cyl).eigenvalues();
        REQUIRE(close(ev(0), 0.0, 1e-13));
        for (int i = 1; i < 5; ++i) REQUIRE(close(ev(i), 3.0, 1e-13));  // c (n-2)
        REQUIRE(cyl.at(1, 2, 1, 2) == 1.0);   // curvature 1 inside the sphere factor
        REQUIRE(cyl.at(1, 5, 1, 5) == 0.0);   // planes through the line factor are flat
        REQUIRE(cyl.at(1, 2, 3, 4) == 0.0);
        REQUIRE(cyl.bianchi_residual() == 0.0);
    }
    SECTION("Kulkarni-Nomizu of the metric doubles the identity") {
        const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(5, 5);
        const CurvatureTensor kn = kulkarni_nomizu(SymmetricForm(g), SymmetricForm(g));
        REQUIRE((kn.m - 2.0 * identity_tensor(5).m).norm() == 0.0);
    }
    SECTION("ricci and scalar agree with the index-loop reference") {
        for (int n : {4, 5, 6}) {
            const CurvatureTensor r = oracles::random_tensor(n, 900 + n);
            const Eigen::MatrixXd ref = oracles::ricci_reference(r);
            REQUIRE((ricci(r).mat - ref).norm() < 1e-13 * (1.0 + ref.norm()));
            REQUIRE(close(scalar(r), ref.trace(), 1e-12 * (1.0 + std::abs(ref.trace()))));
        }
    }
    SECTION("dot and norm use the full component count") {
        const CurvatureTensor i5 = identity_tensor(5);
        const CurvatureTensor cyl = cylinder_tensor(5, 1.0);
        REQUIRE(close(dot(i5, i5), 40.0, 1e-13));
        REQUIRE(close(dot(i5, cyl), 2.0 * scalar(cyl), 1e-13));
        const CurvatureTensor r = oracles::random_tensor(5, 17);
        REQUIRE(close(dot(r, r), r.norm() * r.norm(), 1e-12 * (1.0 + dot(r, r))));
        REQUIRE_THROWS_AS(dot(i5, identity_tensor(6)), DimMismatch);
    }
    SECTION("shift_identity moves sectional slots and the scalar linearly") {
        const CurvatureTensor r = oracles::random_tensor(5, 23);
        const CurvatureTensor s = shift_identity(r, 0.7);
        REQUIRE(close(s.at(1, 2, 1, 2), r.at(1, 2, 1, 2) + 0.7, 1e-14));
        REQUIRE(close(s.at(1, 2, 3, 4), r.at(1, 2, 3, 4), 0.0));
        REQUIRE(close(scalar(s), scalar(r) + 0.7 * 20, 1e-12));
        REQUIRE((s.m - (r + 0.7 * identity_tensor(5)).m).norm() < 1e-15);
    }
    SECTION("ricci and scalar are linear, the product bilinear and symmetric") {
        const CurvatureTensor r = oracles::random_tensor(5, 43);
        const CurvatureTensor s = oracles::random_tensor(5, 44);
        const CurvatureTensor lin = 2.0 * r + (-0.5) * s;
        REQUIRE((ricci(lin).mat - (2.0 * ricci(r).mat - 0.5 * ricci(s).mat)).norm() < 1e-13);
        REQUIRE(close(scalar(lin), 2.0 * scalar(r) - 0.5 * scalar(s), 1e-12));

        Rng rng(45);
        auto sym = [&] {
            Eigen::MatrixXd g(5, 5);
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) g(i, j) = rng.normal();
            return Eigen::MatrixXd(0.5 * (g + g.transpose()));
        };
        const Eigen::MatrixXd a = sym(), b = sym(), c = sym();
        const CurvatureTensor ab = kulkarni_nomizu(SymmetricForm(a), SymmetricForm(b));
        // Same four products, summed in a different order under A <-> B.
        REQUIRE((kulkarni_nomizu(SymmetricForm(b), SymmetricForm(a)).m - ab.m).norm() <
                1e-13 * (1.0 + ab.m.norm()));
        const CurvatureTensor mixed =
            kulkarni_nomizu(SymmetricForm(a + 2.0 * c), SymmetricForm(b));
        const CurvatureTensor cb = kulkarni_nomizu(SymmetricForm(c), SymmetricForm(b));
        REQUIRE((mixed.m - (ab + 2.0 * cb).m).norm() < 1e-13 * (1.0 + ab.m.norm()));
    }
    SECTION("conjugation by an orthogonal matrix preserves all invariants") {
        const CurvatureTensor r = oracles::random_tensor(5, 31);
        const Eigen::MatrixXd u = random_orthogonal(5, 77);
        const CurvatureTensor c = conjugate(r, u);
        REQUIRE(close(scalar(c), scalar(r), 1e-11));
        REQUIRE(close(c.norm(), r.norm(), 1e-11));
        REQUIRE((ricci(c).eigenvalues() - ricci(r).eigenvalues()).cwiseAbs().maxCoeff() <
                1e-10);
        REQUIRE((conjugate(identity_tensor(5), u).m - identity_tensor(5).m).norm() < 1e-12);
        // Pull-back semantics: (U.R)(x,y,z,w) = R(Ux,Uy,Uz,Uw).
        Rng rng(13);
        Eigen::VectorXd x(5), y(5), z(5), w(5);
        for (int i = 0; i < 5; ++i)
            x(i) = rng.normal(), y(i) = rng.normal(), z(i) = rng.normal(), w(i) = rng.normal();
        REQUIRE(close(oracles::curvature_4form(c, x, y, z, w),
                      oracles::curvature_4form(r, u * x, u * y, u * z, u * w), 1e-10));
    }
}

TEST_CASE("curvature quadratic") {
    SECTION("identity and cylinder are eigendirections") {
        for (int n : {5, 6, 7}) {
            const CurvatureTensor i_n = identity_tensor(n);
            const CurvatureTensor qi = q_map(i_n);
            REQUIRE((qi.m - 2.0 * (n - 1) * i_n.m).norm() < 1e-12 * qi.m.norm());
            const CurvatureTensor cyl = cylinder_tensor(n, 1.0);
            const CurvatureTensor qc = q_map(cyl);
            REQUIRE((qc.m - 2.0 * (n - 2) * cyl.m).norm() < 1e-12 * qc.m.norm());
        }
        REQUIRE(close(scal_of_q(identity_tensor(5)), 160.0, 1e-11));
        REQUIRE(close(scal_of_q(cylinder_tensor(5, 1.0)), 72.0, 1e-11));
    }
    SECTION("agrees with the quadruple-loop reference") {
        for (int n : {4, 5, 6}) {
            for (int rep = 0; rep < 4; ++rep) {
                const CurvatureTensor r = oracles::random_tensor(n, 40 * n + rep);
                const CurvatureTensor q = q_map(r);
                const CurvatureTensor ref = oracles::q_reference(r);
                REQUIRE((q.m - ref.m).norm() < 1e-12 * (1.0 + ref.m.norm()));
            }
        }
    }
    SECTION("homogeneity of degree two (hence even)") {
        const CurvatureTensor r = oracles::random_tensor(5, 55);
        const CurvatureTensor q = q_map(r);
        for (double a : {-2.0, 0.5, 3.0}) {
            const CurvatureTensor qa = q_map(a * r);
            REQUIRE((qa.m - a * a * q.m).norm() < 1e-11 * (1.0 + qa.m.norm()));
        }
        REQUIRE((q_map(-1.0 * r).m - q.m).norm() < 1e-12 * (1.0 + q.m.norm()));
    }
    SECTION("orthogonal equivariance") {
        const CurvatureTensor r = oracles::random_tensor(5, 61);
        const Eigen::MatrixXd u = random_orthogonal(5, 62);
        const CurvatureTensor lhs = q_map(conjugate(r, u));
        const CurvatureTensor rhs = conjugate(q_map(r), u);
        REQUIRE((lhs.m - rhs.m).norm() < 1e-11 * (1.0 + rhs.m.norm()));
    }
    SECTION("preserves the Bianchi identity") {
        for (int n : {4, 5, 6, 7}) {
            const CurvatureTensor r = oracles::random_tensor(n, 70 + n);
            const CurvatureTensor q = q_map(r);
            REQUIRE(q.bianchi_residual() <= 1e-10 * q.norm());
        }
    }
    SECTION("trace shortcuts match the full map") {
        for (int n : {4, 5, 6}) {
            const CurvatureTensor r = oracles::random_tensor(n, 80 + n);
            const CurvatureTensor q = q_map(r);
            REQUIRE(close(scal_of_q(r), scalar(q), 1e-11 * (1.0 + std::abs(scalar(q)))));
            REQUIRE((ricci_of_q(r).mat - ricci(q).mat).norm() <
                    1e-11 * (1.0 + ricci(q).mat.norm()));
        }
    }
}
