import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'Shrinkreg.settings_test')
django.setup()
