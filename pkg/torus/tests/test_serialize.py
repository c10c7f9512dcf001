import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from torus import grid as tg
from torus import serialize


class TestFieldFiles(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        grid = tg.ToroidalGrid(16)
        rng = np.random.default_rng(0)
        values = rng.standard_normal(grid.shape + (3,))
        values /= np.linalg.norm(values, axis=-1, keepdims=True)
        self.field = tg.ToroidalField3(grid, values, on_sphere=True)

    def tearDown(self):
        self.tmp.cleanup()

    def test_binary(self):
        path = os.path.join(self.tmp.name, 'u.bin')
        serialize.write_field(self.field, path)
        self.assertEqual(os.path.getsize(path), 8 + 16 * 16 * 3 * 8)
        back = serialize.read_field(path)
        self.assertTrue(back.on_sphere)
        self.assertTrue(np.array_equal(back.values, self.field.values))

    def test_truncated_binary(self):
        path = os.path.join(self.tmp.name, 'u.bin')
        serialize.write_field(self.field, path)
        with open(path, 'r+b') as stream:
            stream.truncate(100)
        with self.assertRaises(ValueError):
            serialize.read_field(path)

    def test_csv(self):
        path = os.path.join(self.tmp.name, 'u.csv')
        serialize.write_field_csv(self.field, path)
        with open(path) as stream:
            lines = stream.read().splitlines()
        self.assertEqual(lines[0], 'i,j,u1,u2,u3')
        self.assertEqual(len(lines), 1 + 16 * 16)
        first = [float(v) for v in lines[1].split(',')[2:]]
        self.assertEqual(first, list(self.field.values[0, 0]))
