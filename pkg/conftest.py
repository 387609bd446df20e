import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'volform_lab.settings')
django.setup()
