"""Projections, expression evaluation, serialisation, truth tables."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohexp import (
    Affine,
    CapacityError,
    Compose,
    Condition,
    Const,
    Coord,
    LiftedProjection,
    Parallel,
    Piece,
    Piecewise,
    Projection,
    SerializationError,
    TConorm,
    TNorm,
    TruthTable,
    ValidationError,
    all_vertices,
    apply_projection,
    compose,
    eval_expr,
    from_dict,
    identity,
    parallel,
    to_dict,
    vertex_index,
)

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


class TestProjection:
    def test_threshold_ties_map_up(self):
        d = Projection.threshold(0.5)
        assert d.apply_point((0.5,)) == (1.0,)
        assert d.apply_point((0.49999999,)) == (0.0,)
        assert d.apply_point((0.0, 1.0, 0.7)) == (0.0, 1.0, 1.0)

    def test_threshold_is_boolean(self):
        assert Projection.threshold(0.3).is_boolean
        assert Projection.threshold(0.3).level_values == (0.0, 1.0)
        assert not Projection.identity().is_boolean
        assert not Projection.quantize(3).is_boolean

    def test_quantize_levels(self):
        d = Projection.quantize(3)
        assert d.level_values == (0.0, 0.5, 1.0)
        assert d.apply_point((0.2, 0.26, 0.76)) == (0.0, 0.5, 1.0)

    def test_identity_is_noop(self):
        d = Projection.identity()
        xs = np.array([[0.1, 0.9]])
        out = d.apply(xs)
        assert np.array_equal(out, xs)
        assert out is not xs

    @given(unit, st.sampled_from([2, 3, 5, 11]))
    def test_quantize_is_idempotent(self, v, levels):
        d = Projection.quantize(levels)
        once = d.apply_point((v,))
        assert d.apply_point(once) == once

    @given(unit, st.floats(min_value=0.01, max_value=1.0))
    def test_threshold_is_idempotent(self, v, alpha):
        d = Projection.threshold(alpha)
        once = d.apply_point((v,))
        assert d.apply_point(once) == once
        assert once[0] in (0.0, 1.0)

    @pytest.mark.parametrize(
        "bad",
        [
            lambda: Projection.threshold(0.0),
            lambda: Projection.threshold(1.5),
            lambda: Projection.quantize(1),
            lambda: Projection("nope"),
            lambda: Projection("threshold", alpha=0.5, levels=2),
        ],
    )
    def test_invalid_parameters_rejected(self, bad):
        with pytest.raises(ValidationError):
            bad()

    def test_round_trip(self):
        for d in (Projection.threshold(0.25), Projection.identity(), Projection.quantize(4)):
            assert Projection.from_dict(d.to_dict()) == d

    def test_from_dict_rejects_junk(self):
        with pytest.raises(SerializationError):
            Projection.from_dict({"kind": "threshold", "alpha": 0.5, "extra": 1})
        with pytest.raises(SerializationError):
            Projection.from_dict({"alpha": 0.5})

    def test_apply_projection_helper(self):
        assert apply_projection(Projection.threshold(0.5), (0.2, 0.8)) == (0.0, 1.0)


# ---------------------------------------------------------------------------
# expression evaluation
# ---------------------------------------------------------------------------


class TestEvaluation:
    def test_const_ignores_input(self):
        c = Const((0.3, 0.7), in_arity=2)
        assert c((0.1, 0.9)) == (0.3, 0.7)
        assert c.in_arity == 2 and c.out_arity == 2

    def test_coord_selects_and_duplicates(self):
        f = Coord((1, 1, 0), 2)
        assert f((0.2, 0.9)) == (0.9, 0.9, 0.2)

    def test_identity_helper(self):
        f = identity(3)
        assert f((0.1, 0.5, 0.9)) == (0.1, 0.5, 0.9)

    @pytest.mark.parametrize(
        "kind,x,y,expected",
        [
            ("min", 0.3, 0.8, 0.3),
            ("product", 0.5, 0.5, 0.25),
            ("lukasiewicz", 0.7, 0.6, 0.3),
            ("lukasiewicz", 0.2, 0.3, 0.0),
        ],
    )
    def test_tnorm_values(self, kind, x, y, expected):
        assert TNorm(kind)((x, y))[0] == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize(
        "kind,x,y,expected",
        [
            ("max", 0.3, 0.8, 0.8),
            ("prob_sum", 0.5, 0.5, 0.75),
            ("lukasiewicz", 0.3, 0.4, 0.7),
            ("lukasiewicz", 0.7, 0.6, 1.0),
        ],
    )
    def test_tconorm_values(self, kind, x, y, expected):
        assert TConorm(kind)((x, y))[0] == pytest.approx(expected, abs=1e-15)

    @given(unit, unit)
    def test_tnorm_below_tconorm(self, x, y):
        for kind in ("lukasiewicz",):
            assert TNorm(kind)((x, y))[0] <= TConorm(kind)((x, y))[0]

    def test_affine_clamps(self):
        f = Affine(((2.0,),), (0.0,))
        assert f((0.7,)) == (1.0,)
        assert f((0.3,)) == (0.6,)

    def test_affine_unclamped_rejects_escape(self):
        f = Affine(((2.0,),), (0.0,), clamp=False)
        assert f((0.4,)) == (0.8,)
        with pytest.raises(ValidationError):
            f((0.7,))

    def test_lifted_projection(self):
        f = LiftedProjection(Projection.threshold(0.5), 2)
        assert f((0.2, 0.8)) == (0.0, 1.0)

    def test_compose_runs_inner_first(self):
        f = compose(TConorm("lukasiewicz"), Parallel((Const((0.3,), in_arity=1), identity(1))))
        assert f((0.9, 0.4)) == pytest.approx((0.7,))

    def test_compose_arity_mismatch(self):
        with pytest.raises(ValidationError):
            Compose(TNorm("min"), identity(3))

    def test_parallel_splits_input(self):
        f = parallel(TNorm("min"), identity(1))
        assert f.in_arity == 3 and f.out_arity == 2
        assert f((0.4, 0.9, 0.5)) == (0.4, 0.5)

    def test_piecewise_first_match_wins(self):
        f = Piecewise(
            pieces=(
                Piece((Condition(0, "le", 0.5),), Const((0.1,), in_arity=1)),
                Piece((Condition(0, "le", 0.8),), Const((0.2,), in_arity=1)),
            ),
            default=Const((0.9,), in_arity=1),
        )
        assert f((0.3,)) == (0.1,)
        assert f((0.6,)) == (0.2,)
        assert f((0.81,)) == (0.9,)

    def test_piecewise_condition_conjunction(self):
        f = Piecewise(
            pieces=(
                Piece(
                    (Condition(0, "ge", 0.5), Condition(1, "lt", 0.5)),
                    Const((1.0,), in_arity=2),
                ),
            ),
            default=Const((0.0,), in_arity=2),
        )
        assert f((0.7, 0.2)) == (1.0,)
        assert f((0.7, 0.5)) == (0.0,)
        assert f((0.2, 0.2)) == (0.0,)

    def test_piecewise_signature_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            Piecewise(
                pieces=(Piece((Condition(0, "le", 0.5),), Const((0.1,), in_arity=2)),),
                default=Const((0.2,), in_arity=1),
            )

    def test_eval_batch_validates_domain(self):
        f = TNorm("min")
        with pytest.raises(ValidationError):
            f.eval_batch(np.array([[0.5, 1.2]]))
        with pytest.raises(ValidationError):
            f.eval_batch(np.array([[0.5, np.nan]]))
        with pytest.raises(ValidationError):
            f.eval_batch(np.array([[0.5]]))

    def test_point_arity_checked(self):
        with pytest.raises(ValidationError):
            TNorm("min")((0.5,))

    def test_eval_expr_helper(self):
        assert eval_expr(TNorm("min"), (0.4, 0.6)) == (0.4,)

    @given(st.lists(unit, min_size=2, max_size=2))
    def test_outputs_stay_in_unit_interval(self, point):
        for f in (TNorm("lukasiewicz"), TConorm("prob_sum"), Affine(((0.5, 0.5),), (0.3,))):
            out = f(tuple(point))
            assert all(0.0 <= v <= 1.0 for v in out)


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def _sample_exprs():
    return [
        Const((0.25, 1.0), in_arity=3),
        Coord((2, 0), 3),
        TNorm("lukasiewicz"),
        TConorm("prob_sum"),
        Affine(((0.5, 0.25), (0.0, 1.0)), (0.1, 0.0), clamp=False),
        LiftedProjection(Projection.quantize(3), 2),
        Compose(TNorm("min"), Parallel((identity(1), Const((0.4,), in_arity=0)))),
        Piecewise(
            pieces=(
                Piece(
                    (Condition(0, "ge", 0.5), Condition(1, "lt", 0.25)),
                    Const((0.9,), in_arity=2),
                ),
            ),
            default=TNorm("product"),
        ),
    ]


class TestSerialisation:
    @pytest.mark.parametrize("expr", _sample_exprs(), ids=lambda e: e.node_name)
    def test_round_trip_preserves_semantics(self, expr):
        clone = from_dict(to_dict(expr))
        assert clone.in_arity == expr.in_arity
        assert clone.out_arity == expr.out_arity
        rng = np.random.default_rng(1)
        xs = rng.random((64, expr.in_arity))
        assert np.array_equal(clone.eval_batch(xs), expr.eval_batch(xs))

    def test_document_shape(self):
        doc = to_dict(TNorm("min"))
        assert doc == {"node": "tnorm", "in_arity": 2, "out_arity": 1, "kind": "min"}

    def test_unknown_node_rejected(self):
        with pytest.raises(SerializationError):
            from_dict({"node": "warp", "in_arity": 1, "out_arity": 1})

    def test_declared_arity_cross_checked(self):
        doc = to_dict(TNorm("min"))
        doc["in_arity"] = 3
        with pytest.raises(SerializationError):
            from_dict(doc)

    def test_malformed_payload_reported(self):
        with pytest.raises(SerializationError):
            from_dict({"node": "coord", "in_arity": 2, "out_arity": 1})
        with pytest.raises(SerializationError):
            from_dict({"node": "const", "values": [1.5], "in_arity": 0, "out_arity": 1})

    def test_non_object_rejected(self):
        with pytest.raises(SerializationError):
            from_dict([1, 2, 3])


# ---------------------------------------------------------------------------
# vertices and truth tables
# ---------------------------------------------------------------------------


class TestVertices:
    def test_order_is_binary_counting(self):
        vs = all_vertices(2)
        assert vs.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]

    def test_vertex_index_inverts_enumeration(self):
        vs = all_vertices(3)
        for i, row in enumerate(vs):
            assert vertex_index([int(b) for b in row]) == i

    def test_zero_arity(self):
        assert all_vertices(0).shape == (1, 0)

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            all_vertices(21)

    def test_vertex_index_rejects_non_bits(self):
        with pytest.raises(ValidationError):
            vertex_index([0, 2])


class TestTruthTable:
    def test_row_lookup(self):
        t = TruthTable(2, 1, [[0], [1], [1], [0]])
        assert t.row((0, 1)) == (1,)
        assert t.row((1, 1)) == (0,)
        assert t.column(0).tolist() == [0, 1, 1, 0]

    def test_equality_and_hash(self):
        a = TruthTable(1, 1, [[0], [1]])
        b = TruthTable(1, 1, [[0], [1]])
        c = TruthTable(1, 1, [[1], [1]])
        assert a == b and hash(a) == hash(b)
        assert a != c

    def test_rows_are_read_only(self):
        t = TruthTable(1, 1, [[0], [1]])
        with pytest.raises(ValueError):
            t.rows[0, 0] = 1

    def test_shape_validated(self):
        with pytest.raises(ValidationError):
            TruthTable(2, 1, [[0], [1]])
        with pytest.raises(ValidationError):
            TruthTable(1, 1, [[0], [2]])

    def test_round_trip(self):
        t = TruthTable(2, 2, [[0, 1], [1, 0], [1, 1], [0, 0]])
        assert TruthTable.from_dict(t.to_dict()) == t


@settings(max_examples=50)
@given(st.integers(min_value=1, max_value=6), st.randoms(use_true_random=False))
def test_projection_after_eval_lands_on_levels(n, rnd):
    """Projected outputs always lie on the projection's level grid."""
    d = Projection.quantize(4)
    f = LiftedProjection(d, n)
    xs = np.array([[rnd.random() for _ in range(n)] for _ in range(16)])
    out = f.eval_batch(xs)
    assert np.isin(out, np.asarray(d.level_values)).all()
