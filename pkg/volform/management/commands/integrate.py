from volform.verify import integrate

from ._base import VolformCommand


class Command(VolformCommand):
    help = 'Intègre une trajectoire et écrit le CSV step,t,x1,x2,x3,det_defect'

    run_options = ('field', 'scheme', 'h', 'steps', 'x0', 'out', 'audit_every')

    def add_arguments(self, parser):
        self.add_run_arguments(parser, *self.run_options)

    def run(self, **options):
        cfg = self.run_config(options)
        scheme = self.build_scheme(cfg)
        trajectory = integrate(scheme, cfg['x0'], cfg['steps'], cfg['audit_every'])
        self.emit(trajectory.to_csv(), cfg['out'])
