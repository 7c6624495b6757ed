import math
import unittest

import numpy as np

from ownership_entropy.copulas import (
    check_copula_axioms,
    copula_grid,
    copula_value,
    is_parametric,
    make_copula,
    parse_copula_spec,
    rectangle_volumes,
)
from ownership_entropy.errors import ParameterDomainError, SupportRangeError

PRODUCT = make_copula('product')
LOWER = make_copula('frechet-lower')
UPPER = make_copula('frechet-upper')

# Representative members of each Archimedean family, away from and near the edges
PARAMETRIC_CASES = (
    ('gumbel', 1.0), ('gumbel', 1.05), ('gumbel', 1.5), ('gumbel', 2.0), ('gumbel', 3.0),
    ('gumbel', 4.0), ('gumbel', 8.0), ('gumbel', 12.0), ('gumbel', 20.0), ('gumbel', 50.0),
    ('clayton', -1.0), ('clayton', -0.7), ('clayton', -0.3), ('clayton', -1e-3), ('clayton', 1e-3),
    ('clayton', 0.5), ('clayton', 2.0), ('clayton', 5.0), ('clayton', 12.0), ('clayton', 30.0),
    ('frank', -50.0), ('frank', -30.0), ('frank', -2.0), ('frank', -1e-3), ('frank', 1e-3),
    ('frank', 0.5), ('frank', 2.0), ('frank', 8.0), ('frank', 30.0), ('frank', 50.0),
)


class TestCopulaExamples(unittest.TestCase):

    def test_nonparametric_values(self):
        self.assertAlmostEqual(copula_value(PRODUCT, 0.3, 0.6), 0.18, places=15)
        self.assertEqual(copula_value(LOWER, 0.3, 0.6), 0.0)
        self.assertAlmostEqual(copula_value(LOWER, 0.7, 0.6), 0.3, places=15)
        self.assertEqual(copula_value(UPPER, 0.3, 0.6), 0.3)

    def test_gumbel_reference_value(self):
        value = copula_value(make_copula('gumbel', 2.0), math.exp(-1), math.exp(-1))
        self.assertAlmostEqual(value, math.exp(-math.sqrt(2)), places=12)
        self.assertAlmostEqual(value, 0.243117, places=6)

    def test_clayton_reference_value(self):
        # (u^-1 + v^-1 - 1)^-1 at u = v = 1/2
        self.assertAlmostEqual(copula_value(make_copula('clayton', 1.0), 0.5, 0.5), 1 / 3, places=14)

    def test_frank_reference_value(self):
        theta = 3.0
        expected = -math.log(1 + (math.exp(-theta * 0.4) - 1) * (math.exp(-theta * 0.7) - 1)
                             / (math.exp(-theta) - 1)) / theta
        self.assertAlmostEqual(copula_value(make_copula('frank', theta), 0.4, 0.7), expected, places=14)

    def test_scalar_and_array_results(self):
        self.assertIsInstance(copula_value(PRODUCT, 0.5, 0.5), float)
        values = copula_value(PRODUCT, np.array([0.1, 0.2]), 0.5)
        np.testing.assert_allclose(values, [0.05, 0.1])

    def test_grid_shape(self):
        grid = copula_grid(PRODUCT, np.linspace(0, 1, 4), np.linspace(0, 1, 6))
        self.assertEqual(grid.shape, (4, 6))


class TestLimitIdentities(unittest.TestCase):

    def setUp(self):
        pts = np.linspace(0.0, 1.0, 41)
        self.u, self.v = np.meshgrid(pts, pts, indexing='ij')

    def _values(self, family, theta=None):
        return copula_value(make_copula(family, theta), self.u, self.v)

    def test_gumbel_one_is_product(self):
        np.testing.assert_array_equal(self._values('gumbel', 1.0), self._values('product'))

    def test_clayton_minus_one_is_lower_bound(self):
        np.testing.assert_array_equal(self._values('clayton', -1.0), self._values('frechet-lower'))

    def test_near_zero_parameters_are_product(self):
        product = self._values('product')
        for family in ('clayton', 'frank'):
            for theta in (1e-7, -1e-7):
                with self.subTest(family=family, theta=theta):
                    np.testing.assert_array_equal(self._values(family, theta), product)
            np.testing.assert_allclose(self._values(family, 1e-4), product, atol=1e-4)

    def test_strong_dependence_approaches_upper_bound(self):
        upper = self._values('frechet-upper')
        np.testing.assert_allclose(self._values('gumbel', 50.0), upper, atol=0.01)
        np.testing.assert_allclose(self._values('clayton', 50.0), upper, atol=0.02)
        np.testing.assert_allclose(self._values('frank', 40.0), upper, atol=0.05)

    def test_strong_negative_frank_approaches_lower_bound(self):
        np.testing.assert_allclose(self._values('frank', -40.0), self._values('frechet-lower'), atol=0.05)


class TestCopulaAxioms(unittest.TestCase):

    def test_nonparametric_copulas_are_exact(self):
        for spec in (PRODUCT, LOWER, UPPER):
            with self.subTest(copula=spec.label):
                self.assertEqual(check_copula_axioms(spec).worst(), 0.0)

    def test_parametric_members(self):
        for family, theta in PARAMETRIC_CASES:
            with self.subTest(family=family, theta=theta):
                report = check_copula_axioms(make_copula(family, theta))
                self.assertEqual(report.groundedness, 0.0)
                self.assertEqual(report.margins, 0.0)
                self.assertLessEqual(report.two_increasing, 1e-12)
                self.assertLessEqual(report.frechet_bounds, 1e-12)
                self.assertTrue(report.passes(1e-9))

    def test_volumes_telescope_to_one(self):
        pts = np.linspace(0, 1, 17)
        for family, theta in PARAMETRIC_CASES:
            with self.subTest(family=family, theta=theta):
                volumes = rectangle_volumes(copula_grid(make_copula(family, theta), pts, pts))
                self.assertAlmostEqual(volumes.sum(), 1.0, places=12)

    def test_grid_size_must_cover_corners(self):
        with self.assertRaises(ParameterDomainError):
            check_copula_axioms(PRODUCT, grid_size=1)

    def test_report_names_copula(self):
        self.assertEqual(check_copula_axioms(make_copula('frank', 2.0), grid_size=5).copula, 'frank:2')


class TestConcordanceOrdering(unittest.TestCase):
    """Each family grows pointwise with its parameter."""

    def setUp(self):
        pts = np.linspace(0.0, 1.0, 26)
        self.u, self.v = np.meshgrid(pts, pts, indexing='ij')

    def _assert_nondecreasing(self, family, thetas):
        previous = None
        for theta in thetas:
            current = copula_value(make_copula(family, theta), self.u, self.v)
            if previous is not None:
                self.assertGreaterEqual(float((current - previous).min()), -1e-12, msg=f'{family} at {theta}')
            previous = current

    def test_gumbel(self):
        self._assert_nondecreasing('gumbel', np.linspace(1.0, 20.0, 40))

    def test_clayton(self):
        self._assert_nondecreasing('clayton', [-1.0, -0.8, -0.5, -0.2, -0.01, 0.01, 0.5, 2.0, 10.0])

    def test_frank(self):
        self._assert_nondecreasing('frank', [-20.0, -5.0, -1.0, -0.01, 0.01, 1.0, 5.0, 20.0])


class TestCopulaSpecs(unittest.TestCase):

    def test_parse_valid(self):
        self.assertEqual(parse_copula_spec('product').family, 'product')
        self.assertEqual(parse_copula_spec('independence').family, 'product')
        self.assertEqual(parse_copula_spec('lower-frechet').family, 'frechet-lower')
        spec = parse_copula_spec('clayton:-0.5')
        self.assertEqual((spec.family, spec.theta), ('clayton', -0.5))
        self.assertEqual(parse_copula_spec(' Gumbel:2 ').theta, 2.0)

    def test_parse_invalid(self):
        for text in ('gumbel', 'product:2', 'student:3', 'frank:abc', 'gumbel:0.5',
                     'clayton:-2', 'frank:0', 'clayton:0'):
            with self.subTest(text=text):
                with self.assertRaises(ParameterDomainError):
                    parse_copula_spec(text)

    def test_domain_message_is_readable(self):
        with self.assertRaises(ParameterDomainError) as ctx:
            make_copula('gumbel', 0.5)
        self.assertEqual(str(ctx.exception), 'gumbel requires theta in [1, inf).')

    def test_arguments_outside_unit_square(self):
        for u, v in ((1.2, 0.5), (-0.1, 0.5), (0.5, float('nan'))):
            with self.subTest(u=u, v=v):
                with self.assertRaises(SupportRangeError):
                    copula_value(PRODUCT, u, v)

    def test_is_parametric(self):
        self.assertTrue(is_parametric('frank'))
        self.assertFalse(is_parametric('frechet-upper'))


if __name__ == '__main__':
    unittest.main()
