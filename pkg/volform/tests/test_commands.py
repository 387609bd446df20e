import json
import math
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from volform.management.commands import integrate
from volform.management.commands._base import join_signed_values

A_TEST = [[0.15, 0.25, 0.4], [0.2, -0.05, 0.3], [0.35, 0.1, -0.1]]


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def field_file(self, data, name='field.json'):
        path = self.tmp / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return str(path)

    def call(self, name, **options):
        out = StringIO()
        call_command(name, stdout=out, **options)
        return out.getvalue()

    def assertExitCode(self, code, name, **options):
        with self.assertRaises(CommandError) as cm:
            self.call(name, **options)
        self.assertEqual(cm.exception.returncode, code)
        return str(cm.exception)


class ClassifyCommandTests(CommandTestCase):
    def test_symplectic_euler_pair(self):
        lines = self.call('classify', sigma='3,2,1', Sigma='1,2,3').splitlines()
        self.assertEqual(lines[0], 'sigma: 3,2,1')
        self.assertEqual(lines[1], 'Sigma: 1,2,3')
        self.assertIn('sign(tau): -1', lines)
        self.assertIn('class: SE', lines)
        self.assertTrue(any(line.startswith('reduction: ') for line in lines))

    def test_identity_pair(self):
        output = self.call('classify', sigma='1,2,3', Sigma='1,2,3')
        self.assertIn('tau: identity', output)
        self.assertIn('class: S1', output)

    def test_malformed_permutation(self):
        message = self.assertExitCode(2, 'classify', sigma='1,1,2', Sigma='1,2,3')
        self.assertIn('E_CONFIG', message)
        self.assertIn('not a permutation', message)


class IntegrateCommandTests(CommandTestCase):
    def test_zero_field(self):
        field = self.field_file({'type': 'linear', 'matrix': [[0, 0, 0]] * 3})
        output = self.call('integrate', field=field, scheme='se-se', h=0.1, steps=3,
                           x0='0.1,0.2,0.3')
        lines = output.splitlines()
        self.assertEqual(lines[0], 'step,t,x1,x2,x3,det_defect')
        self.assertEqual(len(lines), 5)
        for line in lines[1:]:
            values = [float(v) for v in line.split(',')[2:5]]
            self.assertEqual(values, [0.1, 0.2, 0.3])

    def test_negative_x0_from_command_line(self):
        field = self.field_file({'type': 'linear', 'matrix': [[0, 0, 0]] * 3})
        out = StringIO()
        command = integrate.Command(stdout=out)
        command.run_from_argv(['manage.py', 'integrate', '--field', field, '--scheme', 'se-se',
                               '--steps', '1', '--x0', '-1,0,0'])
        rows = out.getvalue().splitlines()[1:]
        self.assertEqual(len(rows), 2)
        for row in rows:
            self.assertEqual([float(v) for v in row.split(',')[2:5]], [-1.0, 0.0, 0.0])

    def test_join_signed_values(self):
        argv = ['integrate', '--x0', '-1,0,0', '--h', '0.1']
        self.assertEqual(join_signed_values(argv),
                         ['integrate', '--x0=-1,0,0', '--h', '0.1'])
        self.assertEqual(join_signed_values(['--x0=-1,0,0']), ['--x0=-1,0,0'])

    def test_quad_potentials_field(self):
        F3 = [0.0] * 28
        F3[6] = 1.0
        field = self.field_file({'type': 'quad-potentials', 'F3': F3})
        lines = self.call('integrate', field=field, scheme='euler', h=0.1, steps=1,
                          x0='0.1,0.2,0.3').splitlines()
        x1 = float(lines[2].split(',')[2])
        self.assertAlmostEqual(x1, 0.12, places=14)

    def test_writes_out_file(self):
        field = self.field_file({'type': 'linear', 'matrix': A_TEST})
        target = self.tmp / 'trajectory.csv'
        output = self.call('integrate', field=field, scheme='s2-quispel', h=0.1, steps=10,
                           out=str(target))
        self.assertEqual(output, '')
        self.assertEqual(len(target.read_text(encoding='utf-8').splitlines()), 12)

    def test_missing_field_file(self):
        message = self.assertExitCode(2, 'integrate', field=str(self.tmp / 'absent.json'),
                                      scheme='euler')
        self.assertIn('E_CONFIG', message)

    def test_invalid_step(self):
        field = self.field_file({'type': 'linear', 'matrix': A_TEST})
        self.assertExitCode(2, 'integrate', field=field, scheme='euler', h=-0.1)

    def test_trace_must_vanish(self):
        field = self.field_file({'type': 'linear', 'matrix': [[1, 0, 0], [0, 0, 0], [0, 0, 0]]})
        self.assertExitCode(2, 'integrate', field=field, scheme='euler')

    def test_linear_only_scheme_on_abc(self):
        field = self.field_file({'type': 'abc', 'A': 1.0, 'B': 0.7, 'C': 0.43})
        self.assertExitCode(2, 'integrate', field=field, scheme='s1-quispel')

    def test_degenerate_legendre(self):
        matrix = [[0.15, 0.25, 0.4], [0.2, -0.05, 0.0], [0.35, 0.1, -0.1]]
        field = self.field_file({'type': 'linear', 'matrix': matrix})
        self.assertExitCode(3, 'integrate', field=field, scheme='dl-se', h=0.1)


class VolcheckCommandTests(CommandTestCase):
    def summary(self, output):
        parts = output.splitlines()[-1].split()
        self.assertEqual(parts[0], 'max_defect')
        self.assertEqual(parts[2], 'mean_defect')
        return float(parts[1])

    def test_volume_preserving(self):
        field = self.field_file({'type': 'linear', 'matrix': A_TEST})
        output = self.call('volcheck', field=field, scheme='se-se', h=0.1, samples=20)
        self.assertEqual(output.splitlines()[0], 'point,x1,x2,x3,defect')
        self.assertLess(self.summary(output), 1e-10)

    def test_euler_over_threshold(self):
        field = self.field_file({'type': 'linear', 'matrix': A_TEST})
        message = self.assertExitCode(1, 'volcheck', field=field, scheme='euler', h=0.1,
                                      samples=5, fail_above=1e-6)
        self.assertTrue(message.startswith('E_VOLUME'))

    def test_deterministic(self):
        field = self.field_file({'type': 'abc', 'A': 1.0, 'B': 0.7, 'C': 0.43})
        options = dict(field=field, scheme='se-se', h=0.1, samples=5, seed=7)
        first = self.call('volcheck', **options)
        self.assertEqual(first, self.call('volcheck', **options))
        self.assertLess(self.summary(first), 1e-6)


class OrderCommandTests(CommandTestCase):
    def slope(self, output):
        label, value = output.splitlines()[-1].split(',')
        self.assertEqual(label, 'slope')
        return float(value)

    def test_rk4_is_fourth_order(self):
        field = self.field_file({'type': 'linear', 'matrix': A_TEST})
        output = self.call('order', field=field, scheme='rk4', T=1.0, h0=0.2, levels=4)
        self.assertEqual(output.splitlines()[0], 'h,error,order')
        self.assertAlmostEqual(self.slope(output), 4.0, delta=0.3)

    def test_single_level(self):
        field = self.field_file({'type': 'linear', 'matrix': A_TEST})
        output = self.call('order', field=field, scheme='dl-dl', levels=1)
        self.assertTrue(math.isnan(self.slope(output)))

    def test_horizon_not_multiple(self):
        field = self.field_file({'type': 'linear', 'matrix': A_TEST})
        self.assertExitCode(2, 'order', field=field, scheme='euler', T=1.0, h0=0.3, levels=2)
