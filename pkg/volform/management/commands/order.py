from volform.verify import observed_order

from ._base import VolformCommand


class Command(VolformCommand):
    help = "Table h, erreur, ordre et pente de l'ordre observé"

    run_options = ('field', 'scheme', 'x0', 'T', 'h0', 'levels', 'out')

    def add_arguments(self, parser):
        self.add_run_arguments(parser, *self.run_options)

    def run(self, **options):
        cfg = self.run_config(options)
        h_list = [cfg['h0'] / 2 ** k for k in range(cfg['levels'])]
        report = observed_order(
            lambda h: self.build_scheme(cfg, h), cfg['vector_field'], cfg['x0'], cfg['T'], h_list,
        )
        table = report.to_table()
        self.emit(table, cfg['out'])
        if cfg['out']:
            self.stdout.write(table.splitlines()[-1])
