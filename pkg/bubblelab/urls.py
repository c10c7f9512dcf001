from django.contrib import admin
from django.urls import include, path

urlpatterns = [
    path('runs/', include('lab.urls')),
    path('admin/', admin.site.urls),
]
