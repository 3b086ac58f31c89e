# Writes a synthetic student table in the UCI Student Performance layout.
# Usage: python3 make_student_fixture.py ROWS [SEED] > student_fixture.csv
import random, sys
rnd = random.Random(int(sys.argv[2]) if len(sys.argv)>2 else 1)
n = int(sys.argv[1])
cols = "school;sex;age;address;famsize;Pstatus;Medu;Fedu;Mjob;Fjob;reason;guardian;traveltime;studytime;failures;schoolsup;famsup;paid;activities;nursery;higher;internet;romantic;famrel;freetime;goout;Dalc;Walc;health;absences;G1;G2;G3".split(";")
jobs = ["at_home","other","services","health","teacher"]
print(";".join(f'"{c}"' for c in cols))
for i in range(n):
    sup = rnd.gauss(0,1)
    medu = max(0,min(4,round(2.5+1.0*sup+rnd.gauss(0,0.8))))
    fedu = max(0,min(4,round(2.3+1.0*sup+rnd.gauss(0,0.8))))
    mjob = jobs[max(0,min(4,round(1.7+0.9*sup+rnd.gauss(0,1))))]
    fjob = jobs[max(0,min(4,round(1.4+0.6*sup+rnd.gauss(0,1))))]
    paid = "yes" if rnd.random() < 0.45+0.15*sup else "no"
    famrel = max(1,min(5,round(4+0.4*sup+rnd.gauss(0,0.8))))
    ability = rnd.gauss(0,1)
    studytime = max(1,min(4,round(2+0.5*ability+0.3*sup+rnd.gauss(0,0.7))))
    health = max(1,min(5,round(3.5+0.3*sup+rnd.gauss(0,1.3))))
    freetime = max(1,min(5,round(3.2+rnd.gauss(0,1))))
    absences = max(0,int(abs(rnd.gauss(0,6)) - 1.5*sup))
    g1 = max(3,min(19,round(11+2.8*ability+0.9*sup+rnd.gauss(0,1.2))))
    g2 = max(0,min(19,round(g1+rnd.gauss(0,1.2))))
    g3 = max(0,min(20,round(g2+rnd.gauss(0,1.2)-0.05*absences)))
    sex = "F" if rnd.random()<0.53 else "M"
    row = ["GP",sex,str(rnd.randint(15,22)),"U","GT3","T",str(medu),str(fedu),mjob,fjob,"course","mother",
           str(rnd.randint(1,4)),str(studytime),str(0 if ability>-1 else rnd.randint(0,3)),"no","yes",paid,
           "yes" if rnd.random()<0.5 else "no","yes","yes","yes","yes" if rnd.random()<0.33 else "no",
           str(famrel),str(freetime),str(rnd.randint(1,5)),str(rnd.randint(1,5)),str(rnd.randint(1,5)),str(health),
           str(absences),str(g1),str(g2),str(g3)]
    print(";".join(f'"{v}"' if not v.lstrip('-').isdigit() else v for v in row))
