from django.apps import AppConfig


class VolformConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'volform'
    verbose_name = 'Intégrateurs préservant le volume'
