from django.core.management.base import CommandError

from volform.verify import fmt, volume_audit

from ._base import EXIT_VOLUME, VolformCommand, random_points


class Command(VolformCommand):
    help = 'Audit |det J − 1| en des points aléatoires reproductibles'

    run_options = ('field', 'scheme', 'h', 'samples', 'seed', 'box', 'out', 'fail_above')

    def add_arguments(self, parser):
        self.add_run_arguments(parser, *self.run_options)

    def run(self, **options):
        cfg = self.run_config(options)
        scheme = self.build_scheme(cfg)
        points = random_points(cfg['seed'], cfg['samples'], cfg['box'])
        audit = volume_audit(scheme, points)

        self.emit(audit.to_csv(), cfg['out'])
        self.stdout.write(audit.summary())

        threshold = cfg['fail_above']
        if threshold is not None and audit.max_defect > threshold:
            raise CommandError(
                f"E_VOLUME: max_defect {fmt(audit.max_defect)} > {fmt(threshold)}",
                returncode=EXIT_VOLUME,
            )
